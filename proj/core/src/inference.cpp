#include "bnn/inference.hpp"

#include "bnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bnn {

void TrainOptions::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be > 0");
    if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
}

namespace {

double mean_of(double total, std::size_t n) { return n == 0 ? 0.0 : total / static_cast<double>(n); }

}  // namespace

WeightSet train_from(WeightSet w, const Dataset& d, double prior_std, const TrainOptions& opt,
                     std::uint64_t batch_seed, TrainingLog* log) {
    opt.validate();
    if (d.empty()) throw ArgumentError("train: dataset is empty");
    const double n = static_cast<double>(d.size());
    AdamState adam(w.size());
    Rng order(batch_seed);
    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        double epoch_total = 0.0;
        for (const auto& idx : batch_indices(d.size(), opt.batch_size, order)) {
            const Dataset batch = select_rows(d, idx);
            const double b = static_cast<double>(idx.size());
            auto lg = grad_neg_log_posterior(w, batch.images, batch.labels, prior_std,
                                             {1.0 / b, 1.0 / n});
            if (!std::isfinite(lg.loss)) {
                throw NumericalError("training diverged: non-finite loss in epoch " +
                                     std::to_string(epoch));
            }
            adam_step(adam, w.flat(), lg.grad.flat(), opt.learning_rate);
            epoch_total += lg.loss * b;
        }
        if (!all_finite(w.flat())) {
            throw NumericalError("training diverged: non-finite weights after epoch " +
                                 std::to_string(epoch));
        }
        if (log) log->epoch_loss.push_back(epoch_total / n);
    }
    return w;
}

WeightSet train_map(const Dataset& d, const ModelConfig& cfg, const TrainOptions& opt,
                    std::uint64_t seed, TrainingLog* log) {
    cfg.validate();
    opt.validate();
    Rng init_rng = Rng::split(seed, "init");
    auto init = kaiming_init(cfg.architecture(), init_rng);
    return train_from(std::move(init), d, cfg.prior_std, opt, Rng::derive(seed, "batches"), log);
}

std::vector<std::uint64_t> ensemble_member_seeds(std::uint64_t seed, std::size_t members) {
    std::vector<std::uint64_t> seeds(members);
    for (std::size_t m = 0; m < members; ++m) seeds[m] = Rng::derive(seed, m);
    return seeds;
}

SampleSet train_ensemble(const Dataset& d, const ModelConfig& cfg,
                         const std::vector<std::uint64_t>& member_seeds, const TrainOptions& opt) {
    if (member_seeds.size() < 2) throw ArgumentError("train_ensemble: need at least 2 members");
    SampleSet out;
    out.method = "ensemble";
    out.meta["member_seeds"] = member_seeds;
    out.meta["epochs"] = opt.epochs;
    out.meta["learning_rate"] = opt.learning_rate;
    out.meta["batch_size"] = opt.batch_size;
    out.meta["prior_std"] = cfg.prior_std;
    out.meta["hidden"] = cfg.hidden_size;
    std::vector<double> final_loss;
    for (auto s : member_seeds) {
        TrainingLog log;
        out.samples.push_back(train_map(d, cfg, opt, s, &log));
        final_loss.push_back(log.epoch_loss.back());
    }
    out.meta["final_loss"] = final_loss;
    return out;
}

SampleSet train_ensemble(const Dataset& d, const ModelConfig& cfg, std::size_t members,
                         const TrainOptions& opt, std::uint64_t seed) {
    if (members < 2) throw ArgumentError("train_ensemble: need at least 2 members");
    auto out = train_ensemble(d, cfg, ensemble_member_seeds(seed, members), opt);
    out.meta["seed"] = seed;
    return out;
}

// ---------------------------------------------------------------------------

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw ArgumentError("inverse_softplus: argument must be > 0");
    // log(exp(y) - 1) = y + log(1 - exp(-y))
    return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> ViPosterior::sigma() const {
    std::vector<double> out(rho.size());
    std::transform(rho.begin(), rho.end(), out.begin(), softplus);
    return out;
}

void ViPosterior::validate() const {
    if (mu.size() != architecture.flat_size() || rho.size() != mu.size()) {
        throw ShapeError("ViPosterior: mu/rho lengths do not match the architecture");
    }
}

double kl_to_prior(std::span<const double> mu, std::span<const double> sigma, double prior_std) {
    if (mu.size() != sigma.size()) throw ShapeError("kl_to_prior: length mismatch");
    const double prior_var = prior_std * prior_std;
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double var = sigma[i] * sigma[i];
        total += std::log(prior_std / sigma[i]) + (var + mu[i] * mu[i]) / (2.0 * prior_var) - 0.5;
    }
    return total;
}

ViObjective vi_objective(const ViPosterior& q, ConstMatrixView x,
                         std::span<const std::uint8_t> labels, std::span<const double> noise,
                         double prior_std, double likelihood_scale) {
    q.validate();
    if (noise.size() != q.mu.size()) throw ShapeError("vi_objective: noise length mismatch");
    const std::size_t m = q.mu.size();
    const auto sigma = q.sigma();
    WeightSet w(q.architecture);
    auto flat = w.flat();
    for (std::size_t i = 0; i < m; ++i) flat[i] = q.mu[i] + sigma[i] * noise[i];

    auto lg = grad_neg_log_posterior(w, x, labels, prior_std, {likelihood_scale, 0.0});
    const auto g = lg.grad.flat();

    ViObjective out;
    out.kl = kl_to_prior(q.mu, sigma, prior_std);
    out.loss = lg.loss + out.kl;
    out.grad_mu.resize(m);
    out.grad_rho.resize(m);
    const double prior_var = prior_std * prior_std;
    for (std::size_t i = 0; i < m; ++i) {
        out.grad_mu[i] = g[i] + q.mu[i] / prior_var;
        const double dkl_dsigma = -1.0 / sigma[i] + sigma[i] / prior_var;
        out.grad_rho[i] = (g[i] * noise[i] + dkl_dsigma) * sigmoid(q.rho[i]);
    }
    return out;
}

ViPosterior train_vi(const Dataset& d, const ModelConfig& cfg, const ViOptions& opt,
                     std::uint64_t seed, TrainingLog* log) {
    cfg.validate();
    opt.train.validate();
    if (!(opt.init_sigma > 0.0)) throw ArgumentError("train_vi: init_sigma must be > 0");
    if (d.empty()) throw ArgumentError("train_vi: dataset is empty");

    Rng init_rng = Rng::split(seed, "init");
    Rng noise_rng = Rng::split(seed, "noise");
    Rng order(Rng::derive(seed, "batches"));

    ViPosterior q;
    q.architecture = cfg.architecture();
    q.mu = kaiming_init(q.architecture, init_rng).flatten();
    q.rho.assign(q.mu.size(), inverse_softplus(opt.init_sigma));

    const std::size_t m = q.mu.size();
    const double n = static_cast<double>(d.size());
    AdamState adam_mu(m), adam_rho(m);
    std::vector<double> noise(m);
    for (std::size_t epoch = 1; epoch <= opt.train.epochs; ++epoch) {
        double epoch_total = 0.0;
        std::size_t steps = 0;
        for (const auto& idx : batch_indices(d.size(), opt.train.batch_size, order)) {
            const Dataset batch = select_rows(d, idx);
            for (double& e : noise) e = noise_rng.normal();
            auto obj = vi_objective(q, batch.images, batch.labels, noise, cfg.prior_std,
                                    n / static_cast<double>(idx.size()));
            if (!std::isfinite(obj.loss)) {
                throw NumericalError("VI diverged: non-finite ELBO in epoch " + std::to_string(epoch));
            }
            // Per-example scale keeps Adam's step size comparable to MAP training.
            for (double& g : obj.grad_mu) g /= n;
            for (double& g : obj.grad_rho) g /= n;
            adam_step(adam_mu, q.mu, obj.grad_mu, opt.train.learning_rate);
            adam_step(adam_rho, q.rho, obj.grad_rho, opt.train.learning_rate);
            epoch_total += obj.loss / n;
            ++steps;
        }
        if (log) log->epoch_loss.push_back(mean_of(epoch_total, steps));
    }
    return q;
}

SampleSet vi_draws(const ViPosterior& q, std::size_t k, std::uint64_t seed) {
    q.validate();
    if (k < 1) throw ArgumentError("vi_draws: k must be >= 1");
    const auto sigma = q.sigma();
    Rng rng(seed);
    SampleSet out;
    out.method = "vi-draws";
    out.meta["seed"] = seed;
    for (std::size_t s = 0; s < k; ++s) {
        WeightSet w(q.architecture);
        auto flat = w.flat();
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = q.mu[i] + sigma[i] * rng.normal();
        out.samples.push_back(std::move(w));
    }
    return out;
}

WeightSet vi_mean(const ViPosterior& q) {
    q.validate();
    return WeightSet(q.architecture, q.mu);
}

// ---------------------------------------------------------------------------

HmcConfig HmcConfig::desk_scale() {
    HmcConfig c;
    c.burn_in_epochs = 100;
    c.thin = 5;
    c.leapfrog_steps = 50;
    c.target_samples = 100;
    c.chains = 4;
    return c;
}

void HmcConfig::validate() const {
    if (burn_in_epochs < 1 || thin < 1 || leapfrog_steps < 1 || target_samples < 1) {
        throw ArgumentError("HMC counts (burn-in, thin, leapfrog steps, samples) must be >= 1");
    }
    if (chains < 1 || chains > target_samples) {
        throw ArgumentError("HMC chains must lie in [1, target_samples]");
    }
    if (!(step_size > 0.0)) throw ArgumentError("HMC step size must be > 0");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
        throw ArgumentError("HMC target acceptance must lie in (0, 1)");
    }
}

nlohmann::json to_json(const HmcConfig& c) {
    return {{"burn_in_epochs", c.burn_in_epochs},
            {"thin", c.thin},
            {"leapfrog_steps", c.leapfrog_steps},
            {"step_size", c.step_size},
            {"target_samples", c.target_samples},
            {"step_size_adapt", c.step_size_adapt},
            {"target_acceptance", c.target_acceptance},
            {"max_consecutive_rejections", c.max_consecutive_rejections},
            {"chains", c.chains}};
}

HmcConfig hmc_config_from_json(const nlohmann::json& j, HmcConfig c) {
    c.burn_in_epochs = j.value("burn_in_epochs", c.burn_in_epochs);
    c.thin = j.value("thin", c.thin);
    c.leapfrog_steps = j.value("leapfrog_steps", c.leapfrog_steps);
    c.step_size = j.value("step_size", c.step_size);
    c.target_samples = j.value("target_samples", c.target_samples);
    c.step_size_adapt = j.value("step_size_adapt", c.step_size_adapt);
    c.target_acceptance = j.value("target_acceptance", c.target_acceptance);
    c.max_consecutive_rejections = j.value("max_consecutive_rejections", c.max_consecutive_rejections);
    c.chains = j.value("chains", c.chains);
    return c;
}

nlohmann::json to_json(const HmcStats& s) {
    return {{"proposals", s.proposals},
            {"accepted", s.accepted},
            {"acceptance_rate", s.acceptance_rate()},
            {"non_finite", s.non_finite},
            {"initial_step_size", s.initial_step_size},
            {"final_step_size", s.final_step_size}};
}

PhasePoint make_phase_point(const PotentialFn& potential, std::vector<double> position) {
    PhasePoint z;
    z.grad.assign(position.size(), 0.0);
    z.momentum.assign(position.size(), 0.0);
    z.potential = potential(position, z.grad);
    z.position = std::move(position);
    return z;
}

void leapfrog(const PotentialFn& potential, PhasePoint& z, double step_size, std::size_t steps) {
    const std::size_t n = z.position.size();
    for (std::size_t i = 0; i < n; ++i) z.momentum[i] -= 0.5 * step_size * z.grad[i];
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) z.position[i] += step_size * z.momentum[i];
        z.potential = potential(z.position, z.grad);
        const double kick = s + 1 == steps ? 0.5 * step_size : step_size;
        for (std::size_t i = 0; i < n; ++i) z.momentum[i] -= kick * z.grad[i];
    }
}

double kinetic_energy(std::span<const double> momentum) {
    double total = 0.0;
    for (double p : momentum) total += p * p;
    return 0.5 * total;
}

double hamiltonian(const PhasePoint& z) { return z.potential + kinetic_energy(z.momentum); }

Transition hmc_transition(const PotentialFn& potential, PhasePoint& z, double step_size,
                          std::size_t steps, Rng& rng) {
    for (double& p : z.momentum) p = rng.normal();
    const double h_before = hamiltonian(z);
    PhasePoint proposal = z;
    leapfrog(potential, proposal, step_size, steps);
    const double h_after = hamiltonian(proposal);

    Transition t;
    const double u = rng.uniform();
    if (!std::isfinite(h_after) || !all_finite(proposal.position)) {
        t.finite = false;
        return t;
    }
    t.accept_prob = std::min(1.0, std::exp(h_before - h_after));
    if (u < t.accept_prob) {
        t.accepted = true;
        z = std::move(proposal);
    }
    return t;
}

ChainResult run_hmc(const PotentialFn& potential, std::vector<double> init, const HmcConfig& cfg,
                    Rng& rng) {
    cfg.validate();
    PhasePoint z = make_phase_point(potential, std::move(init));
    if (!std::isfinite(z.potential)) throw NumericalError("HMC: initial potential is not finite");

    ChainResult out;
    out.stats.initial_step_size = cfg.step_size;
    double log_step = std::log(cfg.step_size);
    std::size_t rejection_streak = 0;
    const std::size_t total = cfg.burn_in_epochs + cfg.thin * cfg.target_samples;
    out.samples.reserve(cfg.target_samples);

    for (std::size_t epoch = 0; epoch < total; ++epoch) {
        const bool burning_in = epoch < cfg.burn_in_epochs;
        const auto t = hmc_transition(potential, z, std::exp(log_step), cfg.leapfrog_steps, rng);
        ++out.stats.proposals;
        if (!t.finite) ++out.stats.non_finite;
        if (t.accepted) {
            ++out.stats.accepted;
            rejection_streak = 0;
        } else if (++rejection_streak > cfg.max_consecutive_rejections) {
            throw NumericalError("HMC: " + std::to_string(rejection_streak) +
                                 " consecutive rejections at epoch " + std::to_string(epoch) +
                                 " (step size " + std::to_string(std::exp(log_step)) + ")");
        }
        if (burning_in) {
            if (cfg.step_size_adapt) {
                // Robbins-Monro on log step size with gain (t+1)^-0.6.
                const double gain = std::pow(static_cast<double>(epoch + 1), -0.6);
                log_step += gain * (t.accept_prob - cfg.target_acceptance);
            }
            continue;
        }
        ++out.stats.proposals_after_burn_in;
        if (t.accepted) ++out.stats.accepted_after_burn_in;
        if ((epoch - cfg.burn_in_epochs + 1) % cfg.thin == 0) out.samples.push_back(z.position);
    }
    out.stats.final_step_size = std::exp(log_step);
    return out;
}

PotentialFn posterior_potential(const Dataset& d, const Architecture& arch, double prior_std) {
    return [&d, arch, prior_std](std::span<const double> position, std::span<double> grad) {
        const auto w = WeightSet::unflatten(arch, position);
        auto lg = grad_neg_log_posterior(w, d.images, d.labels, prior_std);
        const auto g = lg.grad.flat();
        std::copy(g.begin(), g.end(), grad.begin());
        return lg.loss;
    };
}

SampleSet hmc_sample(const Dataset& d, const ModelConfig& cfg, const HmcConfig& h,
                     const WeightSet& init, std::uint64_t seed) {
    return hmc_sample(d, cfg, h, std::span<const WeightSet>(&init, 1), seed);
}

SampleSet hmc_sample(const Dataset& d, const ModelConfig& cfg, const HmcConfig& h,
                     std::span<const WeightSet> inits, std::uint64_t seed) {
    cfg.validate();
    h.validate();
    if (inits.empty()) throw ArgumentError("hmc_sample: no initial weights");
    for (const auto& init : inits) {
        if (init.architecture() != cfg.architecture()) {
            throw ArgumentError("hmc_sample: init architecture does not match model config");
        }
        if (!all_finite(init.flat())) throw ArgumentError("hmc_sample: init weights are not finite");
    }
    if (d.empty()) throw ArgumentError("hmc_sample: dataset is empty");

    const auto arch = cfg.architecture();
    const auto potential = posterior_potential(d, arch, cfg.prior_std);

    SampleSet out;
    out.method = "hmc";
    out.meta["seed"] = seed;
    out.meta["config"] = to_json(h);
    out.meta["prior_std"] = cfg.prior_std;
    out.meta["hidden"] = cfg.hidden_size;
    out.samples.reserve(h.target_samples);

    auto chain_stats = nlohmann::json::array();
    std::size_t proposals = 0, accepted = 0;
    for (std::size_t k = 0; k < h.chains; ++k) {
        HmcConfig hk = h;
        hk.chains = 1;
        hk.target_samples = h.target_samples / h.chains + (k < h.target_samples % h.chains ? 1 : 0);
        Rng rng(h.chains == 1 ? seed : Rng::derive(seed, k));
        auto chain = run_hmc(potential, inits[k % inits.size()].flatten(), hk, rng);
        chain_stats.push_back(to_json(chain.stats));
        proposals += chain.stats.proposals_after_burn_in;
        accepted += chain.stats.accepted_after_burn_in;
        for (auto& s : chain.samples) out.samples.emplace_back(arch, std::move(s));
    }
    out.meta["stats"] = h.chains == 1 ? chain_stats[0] : chain_stats;
    out.meta["acceptance_rate"] =
        proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    return out;
}

}  // namespace bnn
