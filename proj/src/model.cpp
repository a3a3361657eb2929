#include "daadb/model.hpp"

#include <json.hpp>

#include "daadb/binary_io.hpp"
#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/inference.hpp"

namespace daadb {

namespace {

constexpr std::string_view kModelMagic = "DAADB1";

void put_doubles(detail::Writer& w, std::span<const double> values) {
    for (double v : values) w.put(v);
}

void get_doubles(detail::Reader& r, std::span<double> out) {
    for (double& v : out) v = r.get<double>();
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::da_adb: return "da_adb";
        case Method::adb: return "adb";
        case Method::msp: return "msp";
    }
    return "?";
}

std::string_view to_string(EncoderKind e) {
    switch (e) {
        case EncoderKind::bow: return "bow";
        case EncoderKind::emb: return "emb";
        case EncoderKind::raw: return "raw";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    if (s == "da_adb" || s == "da-adb") return Method::da_adb;
    if (s == "adb") return Method::adb;
    if (s == "msp") return Method::msp;
    throw ContractError("unknown method '" + std::string(s) + "' (expected da_adb, adb or msp)");
}

EncoderKind parse_encoder(std::string_view s) {
    if (s == "bow") return EncoderKind::bow;
    if (s == "emb") return EncoderKind::emb;
    if (s == "raw") return EncoderKind::raw;
    throw ContractError("unknown encoder '" + std::string(s) + "' (expected bow, emb or raw)");
}

const std::string& OpenIntentModel::label_name(std::size_t index) const {
    if (index == known_labels.size()) return open_label;
    return known_labels.at(index);
}

Matrix OpenIntentModel::embed(const Matrix& x) const { return forward_head(x, representation.encoder); }

std::vector<std::size_t> OpenIntentModel::predict(const Matrix& x) const {
    if (method == Method::msp) return classify_msp(class_probabilities(representation, x), msp_threshold);
    if (!boundaries) throw ContractError("model has no decision boundaries");
    return predict_with(x, *boundaries);
}

std::vector<std::size_t> OpenIntentModel::predict_with(const Matrix& x, const BoundarySet& b) const {
    return class_indices(classify(embed(x), centroids, b));
}

std::string encode_model(const OpenIntentModel& model) {
    const auto& enc = model.representation.encoder;
    const auto& clf = model.representation.classifier;
    nlohmann::json header = {
        {"method", to_string(model.method)},
        {"encoder", {{"kind", to_string(model.encoder.kind)},
                     {"hash_dim", model.encoder.hash_dim},
                     {"hash_seed", model.encoder.hash_seed}}},
        {"known_labels", model.known_labels},
        {"open_label", model.open_label},
        {"input_dim", enc.input_dim()},
        {"feature_dim", enc.feature_dim()},
        {"num_known", model.num_known()},
        {"alpha", clf.alpha},
        {"head", clf.kind == HeadKind::cosine ? "cosine" : "linear"},
        {"distance_aware", model.representation.distance_aware},
        {"has_boundaries", model.boundaries.has_value()},
        {"msp_threshold", model.msp_threshold},
    };
    const std::string text = header.dump();

    detail::Writer w;
    w.put_bytes(kModelMagic);
    w.put(static_cast<std::uint32_t>(text.size()));
    w.put_bytes(text);
    put_doubles(w, enc.weights.data());
    put_doubles(w, enc.bias);
    put_doubles(w, clf.weights.data());
    put_doubles(w, model.centroids.matrix.data());
    for (std::size_t c : model.centroids.counts) w.put(static_cast<std::uint64_t>(c));
    if (model.boundaries) {
        put_doubles(w, model.boundaries->raw);
        put_doubles(w, model.boundaries->radius);
    }
    return w.take();
}

OpenIntentModel decode_model(std::string_view bytes) {
    if (bytes.substr(0, kModelMagic.size()) != kModelMagic) throw FormatError("DAADB1: bad magic");
    detail::Reader r(bytes.substr(kModelMagic.size()), "DAADB1");
    const auto header_len = r.get<std::uint32_t>();
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(r.get_bytes(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("DAADB1: bad header: ") + e.what());
    }

    OpenIntentModel m;
    try {
        m.method = parse_method(h.at("method").get<std::string>());
        m.encoder.kind = parse_encoder(h.at("encoder").at("kind").get<std::string>());
        m.encoder.hash_dim = h.at("encoder").at("hash_dim").get<std::size_t>();
        m.encoder.hash_seed = h.at("encoder").at("hash_seed").get<std::uint64_t>();
        m.known_labels = h.at("known_labels").get<std::vector<std::string>>();
        m.open_label = h.at("open_label").get<std::string>();
        m.msp_threshold = h.at("msp_threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("DAADB1: bad header: ") + e.what());
    }
    const auto in = h.at("input_dim").get<std::size_t>();
    const auto d = h.at("feature_dim").get<std::size_t>();
    const auto k = h.at("num_known").get<std::size_t>();
    if (k != m.known_labels.size()) throw FormatError("DAADB1: label count does not match K");

    auto& rep = m.representation;
    rep.distance_aware = h.at("distance_aware").get<bool>();
    rep.encoder.weights = Matrix(in, d);
    rep.encoder.bias.assign(d, 0.0);
    rep.classifier.weights = Matrix(k, d);
    rep.classifier.alpha = h.at("alpha").get<double>();
    rep.classifier.kind = h.at("head").get<std::string>() == "linear" ? HeadKind::linear : HeadKind::cosine;
    get_doubles(r, rep.encoder.weights.data());
    get_doubles(r, rep.encoder.bias);
    get_doubles(r, rep.classifier.weights.data());
    m.centroids.matrix = Matrix(k, d);
    get_doubles(r, m.centroids.matrix.data());
    m.centroids.counts.resize(k);
    for (auto& c : m.centroids.counts) c = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (h.at("has_boundaries").get<bool>()) {
        BoundarySet b;
        b.raw.resize(k);
        b.radius.resize(k);
        get_doubles(r, b.raw);
        get_doubles(r, b.radius);
        b.centroids = m.centroids;
        m.boundaries = std::move(b);
    }
    if (r.remaining() != 0) throw FormatError("DAADB1: trailing bytes");
    return m;
}

void save_model(const std::filesystem::path& path, const OpenIntentModel& model) {
    detail::write_file(path.string(), encode_model(model));
}

OpenIntentModel load_model(const std::filesystem::path& path) {
    return decode_model(detail::read_file(path.string()));
}

}  // namespace daadb
