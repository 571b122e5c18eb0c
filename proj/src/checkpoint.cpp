#include "gazecap/checkpoint.hpp"

#include "gazecap/binary_io.hpp"
#include "gazecap/run_config.hpp"

#include <fstream>

namespace gazecap {

namespace {

constexpr std::uint32_t kVersion = 1;

Index to_index(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used == s.size() && v >= 0) return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
    throw InputError("checkpoint: bad value for " + key + ": '" + s + "'");
}

}  // namespace

bool Checkpoint::has(const std::string& key) const {
    for (const auto& kv : config) {
        if (kv.first == key) return true;
    }
    return false;
}

const std::string& Checkpoint::get(const std::string& key) const {
    for (const auto& kv : config) {
        if (kv.first == key) return kv.second;
    }
    throw InputError("checkpoint: missing config key '" + key + "'");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("GZC1", 4);
    binio::put_u32(out, kVersion);
    std::string echo;
    for (const auto& [k, v] : ckpt.config) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
            throw InputError("checkpoint: config entry '" + k + "' cannot be echoed as key=value");
        }
        echo += k + "=" + v + "\n";
    }
    binio::put_string(out, echo);
    binio::put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, m] : ckpt.tensors) {
        binio::put_string(out, name);
        binio::put_u32(out, 2);
        binio::put_u64(out, static_cast<std::uint64_t>(m.rows()));
        binio::put_u64(out, static_cast<std::uint64_t>(m.cols()));
        for (Index i = 0; i < m.size(); ++i) binio::put_f64(out, m.data()[i]);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    binio::expect_magic(in, "GZC1", path.string());
    const auto version = binio::get_u32(in, "version");
    if (version != kVersion) {
        throw InputError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.config = parse_key_values(binio::get_string(in, "config echo"), path.string());
    const auto count = binio::get_u32(in, "record count");
    for (std::uint32_t r = 0; r < count; ++r) {
        std::string name = binio::get_string(in, "tensor name", 4096);
        const auto rank = binio::get_u32(in, "rank");
        if (rank != 2) throw InputError(path.string() + ": tensor " + name + " has unsupported rank");
        const auto rows = binio::get_uint(in, 8, "extent");
        const auto cols = binio::get_uint(in, 8, "extent");
        if (rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1ull << 31)) {
            throw InputError(path.string() + ": tensor " + name + " has implausible extents");
        }
        Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
        for (Index i = 0; i < m.size(); ++i) m.data()[i] = binio::get_f64(in, "tensor values");
        ck.tensors.emplace_back(std::move(name), std::move(m));
    }
    return ck;
}

Checkpoint make_checkpoint(const CaptionerParams& params, const Vocabulary& vocab,
                           std::vector<std::pair<std::string, std::string>> run_config) {
    Checkpoint ck;
    ck.config = std::move(run_config);
    const CaptionerDims d = params.dims.resolved();
    std::string words;
    for (const auto& t : vocab.tokens()) {
        if (!words.empty()) words += ' ';
        words += t;
    }
    ck.config.emplace_back("model.variant", to_string(params.variant()));
    ck.config.emplace_back("model.tied_gate_weights", params.attention.gate_weights_tied() ? "1" : "0");
    ck.config.emplace_back("model.vocab_size", std::to_string(d.vocab));
    ck.config.emplace_back("model.embed", std::to_string(d.embed));
    ck.config.emplace_back("model.feature", std::to_string(d.feature));
    ck.config.emplace_back("model.hidden", std::to_string(d.hidden));
    ck.config.emplace_back("model.projection", std::to_string(d.projection));
    ck.config.emplace_back("model.output", std::to_string(d.output));
    ck.config.emplace_back("model.vocab", words);
    const ParameterSet set = params.parameters();
    for (const auto& p : set.items()) ck.tensors.emplace_back(p.name, p.tensor.value());
    return ck;
}

LoadedModel load_model(const std::filesystem::path& path) {
    Checkpoint ck = read_checkpoint(path);
    CaptionerDims d;
    d.vocab = to_index("model.vocab_size", ck.get("model.vocab_size"));
    d.embed = to_index("model.embed", ck.get("model.embed"));
    d.feature = to_index("model.feature", ck.get("model.feature"));
    d.hidden = to_index("model.hidden", ck.get("model.hidden"));
    d.projection = to_index("model.projection", ck.get("model.projection"));
    d.output = to_index("model.output", ck.get("model.output"));
    const AttentionVariant variant = parse_attention_variant(ck.get("model.variant"));
    const bool tied = ck.get("model.tied_gate_weights") == "1";

    std::vector<std::string> words;
    const std::string& joined = ck.get("model.vocab");
    for (std::size_t i = 0; i < joined.size();) {
        const auto j = std::min(joined.find(' ', i), joined.size());
        words.push_back(joined.substr(i, j - i));
        i = j + 1;
    }
    LoadedModel m{CaptionerParams::zeros(d, variant, tied), Vocabulary::from_tokens(words), {}};
    if (m.vocab.size() != d.vocab) throw InputError(path.string() + ": vocabulary size does not match the model");

    ParameterSet set = m.params.parameters();
    if (set.size() != ck.tensors.size()) {
        throw InputError(path.string() + ": expected " + std::to_string(set.size()) + " tensors, found " +
                         std::to_string(ck.tensors.size()));
    }
    std::size_t k = 0;
    for (const auto& item : set.items()) {
        const auto& [name, value] = ck.tensors[k++];
        if (name != item.name) throw InputError(path.string() + ": expected tensor " + item.name + ", found " + name);
        Tensor t = item.tensor;
        if (t.rows() != value.rows() || t.cols() != value.cols()) {
            throw InputError(path.string() + ": tensor " + name + " has the wrong shape");
        }
        t.mutable_value() = value;
    }
    m.checkpoint = std::move(ck);
    return m;
}

}  // namespace gazecap
