#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace daadb {

struct Utterance {
    std::string text;
    std::string label;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class CorpusFormat { tsv, jsonl };

inline constexpr const char* kOpenLabel = "<OPEN>";

// Known labels (sorted) plus the reserved Open label. Class index K means Open.
class LabelSpace {
public:
    explicit LabelSpace(std::vector<std::string> known_labels, std::string open_label = kOpenLabel);

    [[nodiscard]] const std::vector<std::string>& known_labels() const noexcept { return known_; }
    [[nodiscard]] const std::string& open_label() const noexcept { return open_; }
    [[nodiscard]] std::size_t num_known() const noexcept { return known_.size(); }
    [[nodiscard]] std::size_t open_index() const noexcept { return known_.size(); }

    // Index of a known label, or nullopt for anything else.
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& label) const;
    // Known index, or open_index() for held-out labels and the Open label.
    [[nodiscard]] std::size_t index_or_open(const std::string& label) const;
    [[nodiscard]] const std::string& name(std::size_t index) const;

    friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

private:
    std::vector<std::string> known_;
    std::string open_;
};

struct OpenWorldSplit {
    std::vector<Utterance> train{};
    std::vector<Utterance> valid{};
    std::vector<Utterance> test{};
    // Row positions in the source partitions, aligned with the lists above.
    std::vector<std::size_t> train_rows{};
    std::vector<std::size_t> valid_rows{};
    std::vector<std::size_t> test_rows{};
    LabelSpace label_space;
    std::uint64_t seed = 0;
    double known_ratio = 1.0;
    double labeled_ratio = 1.0;

    [[nodiscard]] std::vector<std::size_t> train_labels() const;
    [[nodiscard]] std::vector<std::size_t> valid_labels() const;
    // Test labels in [0, K]; K is Open.
    [[nodiscard]] std::vector<std::size_t> test_labels() const;
};

std::vector<Utterance> load_corpus(const std::filesystem::path& path, CorpusFormat format);
// Format from the extension: .jsonl / .json => jsonl, anything else tsv.
std::vector<Utterance> load_corpus(const std::filesystem::path& path);

void write_corpus_tsv(const std::filesystem::path& path, const std::vector<Utterance>& rows);

// Sorted distinct labels.
std::vector<std::string> distinct_labels(const std::vector<Utterance>& rows);

// round-half-up(known_ratio * |all_labels|), never below 1.
std::size_t known_class_count(std::size_t total_labels, double known_ratio);

LabelSpace select_known_classes(const std::vector<std::string>& all_labels, double known_ratio,
                                std::uint64_t seed);

// Stratified floor(labeled_ratio * n_c), never below 1.
std::size_t labeled_count(std::size_t class_size, double labeled_ratio);

OpenWorldSplit make_open_world_split(const std::vector<Utterance>& train,
                                     const std::vector<Utterance>& valid,
                                     const std::vector<Utterance>& test, const LabelSpace& space,
                                     double labeled_ratio, std::uint64_t seed);

}  // namespace daadb
