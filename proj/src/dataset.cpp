#include "daadb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "daadb/error.hpp"
#include "daadb/random.hpp"

namespace daadb {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

void check_ratio(double ratio, const char* name) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ContractError(std::string(name) + " must lie in (0, 1], got " + std::to_string(ratio));
    }
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> known_labels, std::string open_label)
    : known_(std::move(known_labels)), open_(std::move(open_label)) {
    std::sort(known_.begin(), known_.end());
    if (std::adjacent_find(known_.begin(), known_.end()) != known_.end()) {
        throw ContractError("known labels must be distinct");
    }
    if (known_.size() < 2) {
        throw ContractError("a label space needs at least 2 known classes, got " + std::to_string(known_.size()));
    }
    if (std::binary_search(known_.begin(), known_.end(), open_)) {
        throw ContractError("open label '" + open_ + "' collides with a known label");
    }
}

std::optional<std::size_t> LabelSpace::index_of(const std::string& label) const {
    auto it = std::lower_bound(known_.begin(), known_.end(), label);
    if (it == known_.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - known_.begin());
}

std::size_t LabelSpace::index_or_open(const std::string& label) const {
    return index_of(label).value_or(open_index());
}

const std::string& LabelSpace::name(std::size_t index) const {
    if (index == open_index()) return open_;
    if (index > open_index()) throw ContractError("class index out of range");
    return known_[index];
}

std::vector<std::size_t> OpenWorldSplit::train_labels() const {
    std::vector<std::size_t> out;
    out.reserve(train.size());
    for (const auto& u : train) out.push_back(*label_space.index_of(u.label));
    return out;
}

std::vector<std::size_t> OpenWorldSplit::valid_labels() const {
    std::vector<std::size_t> out;
    out.reserve(valid.size());
    for (const auto& u : valid) out.push_back(*label_space.index_of(u.label));
    return out;
}

std::vector<std::size_t> OpenWorldSplit::test_labels() const {
    std::vector<std::size_t> out;
    out.reserve(test.size());
    for (const auto& u : test) out.push_back(label_space.index_or_open(u.label));
    return out;
}

std::vector<Utterance> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file " + path.string());

    std::vector<Utterance> rows;
    std::string line;
    std::size_t line_no = 0;
    const std::string where = path.string();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        Utterance u;
        if (format == CorpusFormat::tsv) {
            if (line_no == 1 && line == "text\tlabel") continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
                throw ParseError(where, line_no, "expected exactly two tab-separated columns");
            }
            u.text = line.substr(0, tab);
            u.label = std::string(trim(std::string_view(line).substr(tab + 1)));
        } else {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(where, line_no, std::string("invalid JSON: ") + e.what());
            }
            if (!obj.is_object() || !obj.contains("text") || !obj.contains("label") ||
                !obj["text"].is_string() || !obj["label"].is_string()) {
                throw ParseError(where, line_no, "expected an object with string fields \"text\" and \"label\"");
            }
            u.text = obj["text"].get<std::string>();
            u.label = obj["label"].get<std::string>();
        }
        if (trim(u.text).empty()) throw ParseError(where, line_no, "empty text");
        if (u.label.empty()) throw ParseError(where, line_no, "empty label");
        rows.push_back(std::move(u));
    }
    if (rows.empty()) throw Error("corpus file " + where + " has no rows");
    return rows;
}

std::vector<Utterance> load_corpus(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return load_corpus(path, (ext == ".jsonl" || ext == ".json") ? CorpusFormat::jsonl : CorpusFormat::tsv);
}

void write_corpus_tsv(const std::filesystem::path& path, const std::vector<Utterance>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "text\tlabel\n";
    for (const auto& u : rows) out << u.text << '\t' << u.label << '\n';
}

std::vector<std::string> distinct_labels(const std::vector<Utterance>& rows) {
    std::set<std::string> labels;
    for (const auto& u : rows) labels.insert(u.label);
    return {labels.begin(), labels.end()};
}

std::size_t known_class_count(std::size_t total_labels, double known_ratio) {
    check_ratio(known_ratio, "known_ratio");
    // The epsilon keeps products like 0.35 * 10 = 3.4999999999999996 on the intended side.
    const double k = std::floor(known_ratio * static_cast<double>(total_labels) + 0.5 + 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

LabelSpace select_known_classes(const std::vector<std::string>& all_labels, double known_ratio,
                                std::uint64_t seed) {
    std::vector<std::string> pool(all_labels);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.size() < 2) throw ContractError("need at least 2 labels to select known classes");

    const std::size_t k = known_class_count(pool.size(), known_ratio);
    Rng rng(derive_seed(seed, streams::known_classes));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(k);
    return LabelSpace(std::move(pool));
}

std::size_t labeled_count(std::size_t class_size, double labeled_ratio) {
    check_ratio(labeled_ratio, "labeled_ratio");
    const double n = std::floor(labeled_ratio * static_cast<double>(class_size) + 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(n), 1, class_size);
}

OpenWorldSplit make_open_world_split(const std::vector<Utterance>& train,
                                     const std::vector<Utterance>& valid,
                                     const std::vector<Utterance>& test, const LabelSpace& space,
                                     double labeled_ratio, std::uint64_t seed) {
    check_ratio(labeled_ratio, "labeled_ratio");

    std::map<std::size_t, std::vector<std::size_t>> rows_by_class;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (auto k = space.index_of(train[i].label)) rows_by_class[*k].push_back(i);
    }
    for (std::size_t k = 0; k < space.num_known(); ++k) {
        if (rows_by_class[k].empty()) {
            throw ContractError("known class '" + space.name(k) + "' has no training rows");
        }
    }

    Rng rng(derive_seed(seed, streams::labeled_subsample));
    std::vector<std::size_t> kept;
    for (auto& [k, rows] : rows_by_class) {
        const std::size_t n = labeled_count(rows.size(), labeled_ratio);
        if (n < rows.size()) {
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(n);
        }
        kept.insert(kept.end(), rows.begin(), rows.end());
    }
    std::sort(kept.begin(), kept.end());

    OpenWorldSplit split{.label_space = space};
    split.seed = seed;
    split.labeled_ratio = labeled_ratio;
    for (std::size_t i : kept) {
        split.train.push_back(train[i]);
        split.train_rows.push_back(i);
    }
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (space.index_of(valid[i].label)) {
            split.valid.push_back(valid[i]);
            split.valid_rows.push_back(i);
        }
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        Utterance u = test[i];
        if (!space.index_of(u.label)) u.label = space.open_label();
        split.test.push_back(std::move(u));
        split.test_rows.push_back(i);
    }
    return split;
}

}  // namespace daadb
