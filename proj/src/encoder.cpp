#include "daadb/encoder.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "daadb/binary_io.hpp"
#include "daadb/error.hpp"
#include "daadb/random.hpp"

namespace daadb {

namespace {

constexpr std::string_view kEmbMagic = "EMB1";

bool is_separator(unsigned char c) {
    if (c >= 0x80) return false;
    return std::isspace(c) || std::ispunct(c);
}

}  // namespace

EncoderParams init_encoder(std::size_t input_dim, std::size_t feature_dim, std::uint64_t seed) {
    if (input_dim == 0 || feature_dim == 0) throw ContractError("encoder dimensions must be positive");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    EncoderParams p{Matrix(input_dim, feature_dim), std::vector<double>(feature_dim)};
    for (double& w : p.weights.data()) w = dist(rng);
    for (double& b : p.bias) b = dist(rng);
    return p;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_separator(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash_seed) {
    constexpr std::uint64_t kPrime = 0x100000001b3ULL;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    if (hash_seed != 0) {
        for (int i = 0; i < 8; ++i) {
            h ^= (hash_seed >> (8 * i)) & 0xffU;
            h *= kPrime;
        }
    }
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= kPrime;
    }
    return h;
}

Matrix featurize(const std::vector<Utterance>& utterances, std::size_t input_dim, std::uint64_t hash_seed) {
    if (input_dim < kMinHashDim) {
        throw ContractError("hash dimension must be at least " + std::to_string(kMinHashDim));
    }
    Matrix out(utterances.size(), input_dim);
    for (std::size_t i = 0; i < utterances.size(); ++i) {
        auto row = out.row(i);
        for (const auto& tok : tokenize(utterances[i].text)) {
            const std::uint64_t h = fnv1a64(tok, hash_seed);
            const double sign = (h >> 63) ? -1.0 : 1.0;
            row[h % input_dim] += sign;
        }
        const double n = norm(row);
        if (n > 0.0) {
            for (double& v : row) v /= n;
        }
    }
    return out;
}

std::string encode_embeddings(const Matrix& m) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max()) {
        throw ShapeError("matrix too large for EMB1");
    }
    detail::Writer w;
    w.put_bytes(kEmbMagic);
    w.put(static_cast<std::uint32_t>(m.rows()));
    w.put(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) w.put(static_cast<float>(v));
    return w.take();
}

Matrix decode_embeddings(std::string_view bytes) {
    if (bytes.size() < kEmbMagic.size()) throw FormatError("EMB1: file too short for header");
    if (bytes.substr(0, kEmbMagic.size()) != kEmbMagic) throw FormatError("EMB1: bad magic or version");
    detail::Reader r(bytes.substr(kEmbMagic.size()), "EMB1");
    const auto n = r.get<std::uint32_t>();
    const auto h = r.get<std::uint32_t>();
    const std::uint64_t count = std::uint64_t{n} * h;
    if (r.remaining() < count * sizeof(float)) throw FormatError("EMB1: truncated payload");
    if (r.remaining() > count * sizeof(float)) throw FormatError("EMB1: trailing bytes after payload");
    Matrix m(n, h);
    for (double& v : m.data()) {
        const float f = r.get<float>();
        if (!std::isfinite(f)) throw FormatError("EMB1: non-finite value");
        v = f;
    }
    return m;
}

Matrix load_embeddings(const std::filesystem::path& path) {
    return decode_embeddings(detail::read_file(path.string()));
}

void save_embeddings(const std::filesystem::path& path, const Matrix& m) {
    detail::write_file(path.string(), encode_embeddings(m));
}

Matrix head_preactivation(const Matrix& x, const EncoderParams& params) {
    if (x.cols() != params.input_dim()) {
        throw ShapeError("input has " + std::to_string(x.cols()) + " columns, head expects " +
                         std::to_string(params.input_dim()));
    }
    if (params.bias.size() != params.feature_dim()) throw ShapeError("bias length does not match feature dim");
    const std::size_t d = params.feature_dim();
    Matrix out(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto o = out.row(i);
        std::copy(params.bias.begin(), params.bias.end(), o.begin());
        auto xi = x.row(i);
        for (std::size_t k = 0; k < xi.size(); ++k) {
            const double v = xi[k];
            // Hashed bag-of-words rows are mostly zero.
            if (v == 0.0) continue;
            auto w = params.weights.row(k);
            for (std::size_t j = 0; j < d; ++j) o[j] += v * w[j];
        }
    }
    return out;
}

Matrix forward_head(const Matrix& x, const EncoderParams& params) {
    Matrix z = head_preactivation(x, params);
    for (double& v : z.data()) v = std::max(v, 0.0);
    return z;
}

}  // namespace daadb
