#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "daadb/boundary.hpp"
#include "daadb/dataset.hpp"
#include "daadb/representation.hpp"

namespace daadb {

enum class Method { da_adb, adb, msp };
// bow: hashed bag of words; emb: EMB1 embedding files; raw: features supplied by the caller.
enum class EncoderKind { bow, emb, raw };

std::string_view to_string(Method m);
std::string_view to_string(EncoderKind e);
Method parse_method(std::string_view s);
EncoderKind parse_encoder(std::string_view s);

struct EncoderSpec {
    EncoderKind kind = EncoderKind::bow;
    std::size_t hash_dim = 2048;
    std::uint64_t hash_seed = 0;

    friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

// Everything needed to score new inputs.
struct OpenIntentModel {
    Method method = Method::da_adb;
    EncoderSpec encoder;
    std::vector<std::string> known_labels;
    std::string open_label = kOpenLabel;
    RepresentationModel representation;
    Centroids centroids;
    std::optional<BoundarySet> boundaries;  // absent for msp
    double msp_threshold = kDefaultMspThreshold;

    static constexpr double kDefaultMspThreshold = 0.5;

    [[nodiscard]] std::size_t num_known() const noexcept { return known_labels.size(); }
    [[nodiscard]] const std::string& label_name(std::size_t index) const;

    // Intent representations z for input features x.
    [[nodiscard]] Matrix embed(const Matrix& x) const;
    // Class indices in [0, K]; K is Open.
    [[nodiscard]] std::vector<std::size_t> predict(const Matrix& x) const;
    [[nodiscard]] std::vector<std::size_t> predict_with(const Matrix& x, const BoundarySet& boundaries) const;

    friend bool operator==(const OpenIntentModel&, const OpenIntentModel&) = default;
};

// DAADB1 artifact: "DAADB1", u32 header length, JSON header, then little-endian f64/u64 blocks
// for the head, classifier, centroids and boundaries.
std::string encode_model(const OpenIntentModel& model);
OpenIntentModel decode_model(std::string_view bytes);
void save_model(const std::filesystem::path& path, const OpenIntentModel& model);
OpenIntentModel load_model(const std::filesystem::path& path);

}  // namespace daadb
