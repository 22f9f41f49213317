#include "bnn/checkpoint.hpp"

#include "bnn/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

namespace bnn {

namespace {

constexpr char kMagic[4] = {'B', 'N', 'C', '1'};

class Writer {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        out_.insert(out_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("checkpoint truncated while reading ") + what, pos_);
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes_[pos_++];
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::string tensor_name(std::size_t sample, std::string_view block) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%04zu.", sample);
    return buf + std::string(block);
}

Tensor make_tensor(std::string name, std::vector<std::uint32_t> shape, std::span<const double> values) {
    Tensor t{std::move(name), std::move(shape), std::vector<float>(values.size())};
    for (std::size_t i = 0; i < values.size(); ++i) t.values[i] = static_cast<float>(values[i]);
    return t;
}

std::vector<double> widen(const Tensor& t) { return {t.values.begin(), t.values.end()}; }

std::uint32_t u32_of(std::size_t v) { return static_cast<std::uint32_t>(v); }

void append_weight_tensors(std::vector<Tensor>& out, const WeightSet& w, const std::string& prefix) {
    const auto& a = w.architecture();
    out.push_back(make_tensor(prefix + "w1", {u32_of(a.hidden), u32_of(a.inputs)}, w.w1().data));
    out.push_back(make_tensor(prefix + "b1", {u32_of(a.hidden)}, w.b1()));
    out.push_back(make_tensor(prefix + "w2", {u32_of(a.outputs), u32_of(a.hidden)}, w.w2().data));
    out.push_back(make_tensor(prefix + "b2", {u32_of(a.outputs)}, w.b2()));
}

WeightSet weights_from_tensors(const Checkpoint& c, const Architecture& arch, const std::string& prefix) {
    WeightSet w(arch);
    const std::pair<const char*, std::span<double>> blocks[] = {
        {"w1", w.w1().data}, {"b1", w.b1()}, {"w2", w.w2().data}, {"b2", w.b2()}};
    for (const auto& [block, dst] : blocks) {
        const auto& t = c.at(prefix + block);
        if (t.values.size() != dst.size()) {
            throw FormatError("checkpoint tensor " + prefix + block + " has " +
                                  std::to_string(t.values.size()) + " values, expected " +
                                  std::to_string(dst.size()),
                              0);
        }
        std::copy(t.values.begin(), t.values.end(), dst.begin());
    }
    return w;
}

nlohmann::json expect_kind(const Checkpoint& c, std::string_view kind) {
    auto meta = c.meta_json();
    if (meta.value("kind", std::string()) != kind) {
        throw FormatError("checkpoint holds '" + meta.value("kind", std::string("?")) + "', expected '" +
                              std::string(kind) + "'",
                          0);
    }
    return meta;
}

}  // namespace

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

const Tensor& Checkpoint::at(std::string_view name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return t;
    }
    throw FormatError("checkpoint has no tensor named '" + std::string(name) + "'", 0);
}

bool Checkpoint::contains(std::string_view name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return true;
    }
    return false;
}

nlohmann::json Checkpoint::meta_json() const {
    try {
        return nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint meta is not valid JSON: ") + e.what(), 0);
    }
}

void Checkpoint::validate() const {
    std::set<std::string_view> names;
    for (const auto& t : tensors) {
        if (!names.insert(t.name).second) throw ArgumentError("checkpoint: duplicate tensor name '" + t.name + "'");
        if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ArgumentError("checkpoint: tensor name too long");
        }
        if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
            throw ArgumentError("checkpoint: too many dimensions in '" + t.name + "'");
        }
        if (t.element_count() != t.values.size()) {
            throw ArgumentError("checkpoint: tensor '" + t.name + "' has " + std::to_string(t.values.size()) +
                                " values for shape with " + std::to_string(t.element_count()));
        }
    }
}

bool Checkpoint::operator==(const Checkpoint& other) const {
    if (meta != other.meta || tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& a = tensors[i];
        const auto& b = other.tensors[i];
        if (a.name != b.name || a.shape != b.shape || a.values.size() != b.values.size()) return false;
        if (!a.values.empty() &&
            std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) != 0) {
            return false;
        }
    }
    return true;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
    c.validate();
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(u32_of(c.tensors.size()));
    for (const auto& t : c.tensors) {
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (auto d : t.shape) w.u32(d);
        for (float v : t.values) w.f32(v);
    }
    w.u32(u32_of(c.meta.size()));
    w.bytes(c.meta.data(), c.meta.size());
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.text(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad checkpoint magic", 0);
    const std::uint32_t count = r.u32("tensor count");
    Checkpoint c;
    std::set<std::string> names;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t;
        const auto name_at = r.pos();
        t.name = r.text(r.u16("name length"), "tensor name");
        if (!names.insert(t.name).second) throw FormatError("duplicate tensor name '" + t.name + "'", name_at);
        const std::uint8_t ndims = r.u8("ndims");
        t.shape.resize(ndims);
        for (auto& d : t.shape) d = r.u32("dimension");
        const std::size_t n = t.element_count();
        if (n > r.remaining() / 4) {
            throw FormatError("checkpoint truncated in data of tensor '" + t.name + "'", r.pos());
        }
        t.values.resize(n);
        for (auto& v : t.values) v = std::bit_cast<float>(r.u32("tensor data"));
        c.tensors.push_back(std::move(t));
    }
    c.meta = r.text(r.u32("meta length"), "meta");
    if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint meta", r.pos());
    return c;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_file_atomic(path, encode_checkpoint(c));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path.string(), 0);
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_checkpoint(bytes);
}

nlohmann::json to_json(const Architecture& a) {
    return {{"inputs", a.inputs},
            {"hidden", a.hidden},
            {"outputs", a.outputs},
            {"activation", std::string(to_string(a.activation))}};
}

Architecture architecture_from_json(const nlohmann::json& j) {
    try {
        return {j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
                j.at("outputs").get<std::size_t>(),
                parse_activation(j.value("activation", std::string("relu")))};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad architecture metadata: ") + e.what(), 0);
    }
}

std::string checkpoint_kind(const Checkpoint& c) { return c.meta_json().value("kind", std::string()); }

Checkpoint to_checkpoint(const WeightSet& w, nlohmann::json meta) {
    Checkpoint c;
    append_weight_tensors(c.tensors, w, "");
    meta["kind"] = "weights";
    meta["architecture"] = to_json(w.architecture());
    c.meta = meta.dump();
    return c;
}

WeightSet weights_from_checkpoint(const Checkpoint& c) {
    const auto meta = c.meta_json();
    const auto kind = meta.value("kind", std::string());
    if (kind == "gaussian") return gaussian_from_checkpoint(c).mean_weights();
    if (kind == "vi") return vi_mean(vi_from_checkpoint(c));
    expect_kind(c, "weights");
    return weights_from_tensors(c, architecture_from_json(meta.at("architecture")), "");
}

Checkpoint to_checkpoint(const SampleSet& s) {
    s.validate();
    Checkpoint c;
    for (std::size_t k = 0; k < s.size(); ++k) append_weight_tensors(c.tensors, s.samples[k], tensor_name(k, ""));
    nlohmann::json meta = {{"kind", "samples"},
                           {"method", s.method},
                           {"count", s.size()},
                           {"architecture", to_json(s.architecture())},
                           {"info", s.meta}};
    c.meta = meta.dump();
    return c;
}

SampleSet samples_from_checkpoint(const Checkpoint& c) {
    const auto meta = expect_kind(c, "samples");
    const auto arch = architecture_from_json(meta.at("architecture"));
    SampleSet s;
    s.method = meta.value("method", std::string());
    s.meta = meta.value("info", nlohmann::json::object());
    const auto count = meta.at("count").get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) s.samples.push_back(weights_from_tensors(c, arch, tensor_name(k, "")));
    return s;
}

Checkpoint to_checkpoint(const DiagGaussian& g) {
    g.validate();
    Checkpoint c;
    c.tensors.push_back(make_tensor("mu", {u32_of(g.mu.size())}, g.mu));
    c.tensors.push_back(make_tensor("sigma2", {u32_of(g.sigma2.size())}, g.sigma2));
    nlohmann::json meta = {{"kind", "gaussian"},
                           {"tag", std::string(to_string(g.kind))},
                           {"source_method", g.source_method},
                           {"architecture", to_json(g.architecture)}};
    if (g.reference_id) meta["reference_id"] = *g.reference_id;
    c.meta = meta.dump();
    return c;
}

DiagGaussian gaussian_from_checkpoint(const Checkpoint& c) {
    const auto meta = expect_kind(c, "gaussian");
    DiagGaussian g;
    g.architecture = architecture_from_json(meta.at("architecture"));
    g.mu = widen(c.at("mu"));
    g.sigma2 = widen(c.at("sigma2"));
    g.kind = parse_gaussian_kind(meta.value("tag", std::string("direct")));
    g.source_method = meta.value("source_method", std::string());
    if (meta.contains("reference_id")) g.reference_id = meta.at("reference_id").get<std::size_t>();
    try {
        g.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(e.what(), 0);
    }
    return g;
}

Checkpoint to_checkpoint(const ViPosterior& q, nlohmann::json meta) {
    q.validate();
    Checkpoint c;
    c.tensors.push_back(make_tensor("mu", {u32_of(q.mu.size())}, q.mu));
    c.tensors.push_back(make_tensor("rho", {u32_of(q.rho.size())}, q.rho));
    meta["kind"] = "vi";
    meta["architecture"] = to_json(q.architecture);
    c.meta = meta.dump();
    return c;
}

ViPosterior vi_from_checkpoint(const Checkpoint& c) {
    const auto meta = expect_kind(c, "vi");
    ViPosterior q;
    q.architecture = architecture_from_json(meta.at("architecture"));
    q.mu = widen(c.at("mu"));
    q.rho = widen(c.at("rho"));
    try {
        q.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(e.what(), 0);
    }
    return q;
}

}  // namespace bnn
