#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "daadb/dataset.hpp"
#include "daadb/matrix.hpp"

namespace daadb {

// Dense head z = ReLU(x W + b). W is input_dim x feature_dim.
struct EncoderParams {
    Matrix weights;
    std::vector<double> bias;

    [[nodiscard]] std::size_t input_dim() const noexcept { return weights.rows(); }
    [[nodiscard]] std::size_t feature_dim() const noexcept { return weights.cols(); }

    friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Entries uniform in [-1/sqrt(D), 1/sqrt(D)].
EncoderParams init_encoder(std::size_t input_dim, std::size_t feature_dim, std::uint64_t seed);

// Lower-cased tokens split on whitespace and ASCII punctuation. Non-ASCII bytes stay inside tokens.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash_seed = 0);

inline constexpr std::size_t kMinHashDim = 16;

// Signed hashed bag of words, rows L2-normalised (rows without tokens stay zero).
Matrix featurize(const std::vector<Utterance>& utterances, std::size_t input_dim, std::uint64_t hash_seed);

// EMB1: "EMB1", u32 N, u32 H, N*H float32, all little-endian.
Matrix load_embeddings(const std::filesystem::path& path);
Matrix decode_embeddings(std::string_view bytes);
void save_embeddings(const std::filesystem::path& path, const Matrix& m);
std::string encode_embeddings(const Matrix& m);

Matrix forward_head(const Matrix& x, const EncoderParams& params);
// Pre-activation x W + b (used by backprop).
Matrix head_preactivation(const Matrix& x, const EncoderParams& params);

}  // namespace daadb
