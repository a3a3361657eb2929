#include <charconv>
#include <cstdio>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/harness.hpp"

namespace daadb {

namespace {

std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ContractError("invalid seed '" + std::string(s) + "'");
    return v;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

nlohmann::json toml_to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        nlohmann::json obj = nlohmann::json::object();
        for (const auto& [k, v] : *t) obj[std::string(k.str())] = toml_to_json(v);
        return obj;
    }
    if (const auto* a = node.as_array()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : *a) arr.push_back(toml_to_json(v));
        return arr;
    }
    if (const auto* v = node.as_string()) return v->get();
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    throw ContractError("unsupported TOML value type in config");
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        std::string_view part = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        if (part.empty()) throw ContractError("empty entry in seed list '" + std::string(text) + "'");
        if (const auto dash = part.find('-'); dash != std::string_view::npos) {
            const auto lo = parse_u64(part.substr(0, dash));
            const auto hi = parse_u64(part.substr(dash + 1));
            if (hi < lo) throw ContractError("descending seed range '" + std::string(part) + "'");
            for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            seeds.push_back(parse_u64(part));
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return seeds;
}

EncoderKind ExperimentConfig::resolved_encoder() const {
    return dataset == kSyntheticDataset ? EncoderKind::raw : encoder.kind;
}

std::size_t ExperimentConfig::resolved_feature_dim() const {
    if (feature_dim != 0) return feature_dim;
    return resolved_encoder() == EncoderKind::emb ? 768 : 64;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ContractError("at least one seed is required");
    if (!(known_ratio > 0.0 && known_ratio <= 1.0)) throw ContractError("known_ratio must lie in (0, 1]");
    if (!(labeled_ratio > 0.0 && labeled_ratio <= 1.0)) throw ContractError("labeled_ratio must lie in (0, 1]");
    const auto enc = resolved_encoder();
    if (dataset != kSyntheticDataset && enc == EncoderKind::raw) {
        throw ContractError("the raw encoder is only available for the synthetic dataset");
    }
    if (enc == EncoderKind::emb && emb_file.empty()) throw ContractError("--encoder emb requires --emb-file");
    if (enc == EncoderKind::bow && encoder.hash_dim < kMinHashDim) {
        throw ContractError("hash dimension must be at least " + std::to_string(kMinHashDim));
    }
    if (!(representation.alpha > 0.0)) throw ContractError("alpha must be positive");
    if (!(representation.learning_rate > 0.0)) throw ContractError("representation learning rate must be positive");
    if (representation.batch_size == 0) throw ContractError("batch size must be positive");
    if (!(boundary.learning_rate > 0.0)) throw ContractError("boundary learning rate must be positive");
    if (!(boundary.tolerance > 0.0)) throw ContractError("boundary tolerance must be positive");
    if (!(msp_threshold > 0.0 && msp_threshold <= 1.0)) throw ContractError("msp threshold must lie in (0, 1]");
    if (jobs == 0) throw ContractError("jobs must be at least 1");
}

nlohmann::json to_json(const ExperimentConfig& c) {
    const auto& s = c.synthetic;
    return {
        {"dataset", c.dataset},
        {"data_dir", c.data_dir.string()},
        {"method", to_string(c.method)},
        {"known_ratio", c.known_ratio},
        {"labeled_ratio", c.labeled_ratio},
        {"seeds", c.seeds},
        {"encoder", to_string(c.encoder.kind)},
        {"emb_file", c.emb_file},
        {"feature_dim", c.feature_dim},
        {"hash_dim", c.encoder.hash_dim},
        {"hash_seed", c.encoder.hash_seed},
        {"alpha", c.representation.alpha},
        {"rep_lr", c.representation.learning_rate},
        {"batch_size", c.representation.batch_size},
        {"max_epochs", c.representation.max_epochs},
        {"patience", c.representation.patience},
        {"boundary_lr", c.boundary.learning_rate},
        {"boundary_max_epochs", c.boundary.max_epochs},
        {"boundary_tol", c.boundary.tolerance},
        {"boundary_stable_epochs", c.boundary.stable_epochs},
        {"boundary_batch_size", c.boundary.batch_size},
        {"adam_beta1", c.boundary.beta1},
        {"adam_beta2", c.boundary.beta2},
        {"adam_epsilon", c.boundary.epsilon},
        {"msp_threshold", c.msp_threshold},
        {"output_dir", c.output_dir.string()},
        {"dump_radii", c.dump_radii},
        {"jobs", c.jobs},
        {"synthetic",
         {{"num_classes", s.num_classes},
          {"dim", s.dim},
          {"sigma", s.sigma},
          {"spread", s.spread},
          {"min_separation", s.min_separation},
          {"train_per_class", s.train_per_class},
          {"valid_per_class", s.valid_per_class},
          {"test_per_class", s.test_per_class},
          {"open_test", s.open_test},
          {"open_extent", s.open_extent},
          {"seed", s.seed}}},
    };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        read(j, "dataset", c.dataset);
        if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        read(j, "known_ratio", c.known_ratio);
        read(j, "labeled_ratio", c.labeled_ratio);
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            c.seeds = s.is_string() ? parse_seed_list(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
        }
        if (j.contains("seed")) c.seeds = {j.at("seed").get<std::uint64_t>()};
        if (j.contains("encoder")) c.encoder.kind = parse_encoder(j.at("encoder").get<std::string>());
        read(j, "emb_file", c.emb_file);
        read(j, "feature_dim", c.feature_dim);
        read(j, "hash_dim", c.encoder.hash_dim);
        read(j, "hash_seed", c.encoder.hash_seed);
        read(j, "alpha", c.representation.alpha);
        read(j, "rep_lr", c.representation.learning_rate);
        read(j, "batch_size", c.representation.batch_size);
        read(j, "max_epochs", c.representation.max_epochs);
        read(j, "patience", c.representation.patience);
        read(j, "boundary_lr", c.boundary.learning_rate);
        read(j, "boundary_max_epochs", c.boundary.max_epochs);
        read(j, "boundary_tol", c.boundary.tolerance);
        read(j, "boundary_stable_epochs", c.boundary.stable_epochs);
        read(j, "boundary_batch_size", c.boundary.batch_size);
        read(j, "adam_beta1", c.boundary.beta1);
        read(j, "adam_beta2", c.boundary.beta2);
        read(j, "adam_epsilon", c.boundary.epsilon);
        read(j, "msp_threshold", c.msp_threshold);
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        read(j, "dump_radii", c.dump_radii);
        read(j, "jobs", c.jobs);
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            auto& o = c.synthetic;
            read(s, "num_classes", o.num_classes);
            read(s, "dim", o.dim);
            read(s, "sigma", o.sigma);
            read(s, "spread", o.spread);
            read(s, "min_separation", o.min_separation);
            read(s, "train_per_class", o.train_per_class);
            read(s, "valid_per_class", o.valid_per_class);
            read(s, "test_per_class", o.test_per_class);
            read(s, "open_test", o.open_test);
            read(s, "open_extent", o.open_extent);
            read(s, "seed", o.seed);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("invalid config value: ") + e.what());
    }
    return c;
}

std::string config_hash(const ExperimentConfig& config) {
    auto j = to_json(config);
    // Output location, extra artifacts and thread count do not change the results.
    j.erase("output_dir");
    j.erase("jobs");
    j.erase("dump_radii");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

ExperimentConfig parse_config_toml(std::string_view text) {
    toml::table table;
    try {
        table = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config: " << e.description() << " at line " << e.source().begin.line;
        throw ContractError(msg.str());
    }
    return config_from_json(toml_to_json(table));
}

ExperimentConfig load_config_toml(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_toml(ss.str());
}

}  // namespace daadb
