#include <doctest.h>

#include <fstream>
#include <sstream>

#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/harness.hpp"
#include "temp_dir.hpp"

using namespace daadb;

namespace {

// A small, quick variant of the synthetic suite.
ExperimentConfig quick_config() {
    ExperimentConfig c;
    c.known_ratio = 1.0;
    c.seeds = {0, 1};
    c.feature_dim = 16;
    c.representation.max_epochs = 8;
    c.synthetic.num_classes = 3;
    c.synthetic.dim = 3;
    c.synthetic.train_per_class = 60;
    c.synthetic.valid_per_class = 20;
    c.synthetic.test_per_class = 30;
    c.synthetic.open_test = 60;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_tsv(const std::filesystem::path& p, const std::vector<Utterance>& rows) {
    std::filesystem::create_directories(p.parent_path());
    write_corpus_tsv(p, rows);
}

std::vector<Utterance> text_rows(std::size_t per_class) {
    const char* labels[] = {"flight", "weather", "music", "alarm"};
    const char* words[] = {"book a flight ticket to", "what is the weather forecast in", "play some music by",
                           "set an alarm for"};
    std::vector<Utterance> rows;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (int k = 0; k < 4; ++k) rows.push_back({std::string(words[k]) + " item" + std::to_string(i), labels[k]});
    }
    return rows;
}

}  // namespace

TEST_CASE("seed lists") {
    CHECK(parse_seed_list("0-3") == std::vector<std::uint64_t>{0, 1, 2, 3});
    CHECK(parse_seed_list("4, 2,9") == std::vector<std::uint64_t>{4, 2, 9});
    CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
    CHECK(parse_seed_list("0-1,5") == std::vector<std::uint64_t>{0, 1, 5});
    CHECK_THROWS_AS(parse_seed_list("3-1"), ContractError);
    CHECK_THROWS_AS(parse_seed_list("a"), ContractError);
    CHECK_THROWS_AS(parse_seed_list("1,,2"), ContractError);
}

TEST_CASE("toml config") {
    const auto c = parse_config_toml(R"(
dataset = "banking"
method = "adb"
known_ratio = 0.5
seeds = "0-2"
encoder = "emb"
emb_file = "emb/{split}.emb"
boundary_lr = 0.01
batch_size = 64

[synthetic]
dim = 7
)");
    CHECK(c.dataset == "banking");
    CHECK(c.method == Method::adb);
    CHECK(c.known_ratio == 0.5);
    CHECK(c.seeds.size() == 3);
    CHECK(c.encoder.kind == EncoderKind::emb);
    CHECK(c.boundary.learning_rate == 0.01);
    CHECK(c.representation.batch_size == 64);
    CHECK(c.synthetic.dim == 7);
    CHECK(c.resolved_feature_dim() == 768);
    CHECK(parse_config_toml("seeds = [3, 4]").seeds == std::vector<std::uint64_t>{3, 4});
    CHECK_THROWS_AS(parse_config_toml("method = \"svm\""), ContractError);
    CHECK_THROWS_AS(parse_config_toml("known_ratio = [1"), ContractError);
    CHECK_THROWS_AS(parse_config_toml("known_ratio = \"half\""), ContractError);
}

TEST_CASE("config json round trip and hash") {
    auto c = quick_config();
    c.method = Method::msp;
    c.encoder.hash_seed = 12;
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    auto moved = c;
    moved.output_dir = "/elsewhere";
    moved.jobs = 4;
    CHECK(config_hash(moved) == config_hash(c));
    moved.known_ratio = 0.5;
    CHECK(config_hash(moved) != config_hash(c));
}

TEST_CASE("config validation") {
    auto c = quick_config();
    CHECK_NOTHROW(c.validate());
    c.seeds.clear();
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = quick_config();
    c.known_ratio = 0.0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = quick_config();
    c.dataset = "banking";
    c.encoder.kind = EncoderKind::raw;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c.encoder.kind = EncoderKind::emb;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c.emb_file = "x/{split}.emb";
    CHECK_NOTHROW(c.validate());
    c.encoder.kind = EncoderKind::bow;
    c.encoder.hash_dim = 4;
    CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("experiment composition, determinism and artifacts") {
    testing::TempDir dir;
    auto c = quick_config();
    c.output_dir = dir / "out";
    c.dump_radii = true;
    const auto r = run_experiment(c);
    REQUIRE(r.seeds.size() == 2);
    const auto reports = r.reports();
    REQUIRE(reports.size() == 2);
    CHECK(r.aggregate.runs == 2);
    CHECK(r.aggregate.acc_mean == doctest::Approx((reports[0].acc + reports[1].acc) / 2));
    CHECK(r.aggregate.f1_open_mean == doctest::Approx((reports[0].f1_open + reports[1].f1_open) / 2));

    for (const char* f : {"manifest.json", "results.json", "seed_0/metrics.json", "seed_0/model.daadb",
                          "seed_1/radii.csv"}) {
        CHECK_MESSAGE(std::filesystem::exists(c.output_dir / f), f);
    }
    const auto manifest = nlohmann::json::parse(slurp(c.output_dir / "manifest.json"));
    CHECK(manifest.at("config_hash") == config_hash(c));
    CHECK(manifest.at("seeds") == nlohmann::json{0, 1});
    CHECK(manifest.at("failures").empty());
    CHECK(summary_from_json(manifest.at("aggregate")) == r.aggregate);

    // Saved models predict exactly like the in-memory ones.
    const auto& s = r.seeds[0];
    const auto loaded = load_model(c.output_dir / "seed_0/model.daadb");
    CHECK(loaded.predict(s.test_x) == s.model->predict(s.test_x));

    auto again = c;
    again.output_dir = dir / "again";
    again.jobs = 2;
    run_experiment(again);
    CHECK(slurp(c.output_dir / "results.json") == slurp(again.output_dir / "results.json"));
    CHECK(slurp(c.output_dir / "seed_1/metrics.json") == slurp(again.output_dir / "seed_1/metrics.json"));
}

TEST_CASE("seed failures are recorded and total failure throws") {
    auto c = quick_config();
    c.known_ratio = 0.25;  // one known class out of three
    CHECK_THROWS_AS(run_experiment(c), Error);
    const auto corpus = load_dataset(c);
    const auto s = run_seed(c, corpus, 0);
    CHECK_FALSE(s.report);
    CHECK(s.error.find("2 known classes") != std::string::npos);
}

TEST_CASE("msp and adb variants run") {
    auto c = quick_config();
    c.seeds = {0};
    for (auto m : {Method::adb, Method::msp}) {
        c.method = m;
        const auto r = run_experiment(c);
        REQUIRE(r.seeds[0].model);
        CHECK(r.seeds[0].model->boundaries.has_value() == (m == Method::adb));
        CHECK(r.seeds[0].boundary_fit.has_value() == (m == Method::adb));
    }
}

TEST_CASE("radius ablation") {
    auto c = quick_config();
    const auto base = run_experiment(c);
    const auto rows = run_radius_ablation(c, {0.5, 1.0, 2.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].learned);
    CHECK_FALSE(rows[0].learned);
    CHECK(rows[1].acc == base.aggregate.acc_mean);
    const auto csv = ablation_csv(rows);
    CHECK(csv.rfind("factor,acc,learned\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    c.method = Method::msp;
    CHECK_THROWS_AS(run_radius_ablation(c, {1.0}), ContractError);
}

TEST_CASE("labeled ratio study") {
    auto c = quick_config();
    c.seeds = {0};
    const auto base = run_experiment(c);
    const auto one = run_labeled_ratio_study(c, {1.0}, {Method::da_adb});
    REQUIRE(one.size() == 1);
    CHECK(one[0].acc == base.aggregate.acc_mean);
    const auto grid = run_labeled_ratio_study(c, {0.5, 1.0}, {Method::da_adb, Method::adb});
    CHECK(grid.size() == 4);
    CHECK(grid[1].method == Method::adb);
    CHECK(labeled_ratio_csv(grid).rfind("ratio,method,acc\n0.5,da_adb,", 0) == 0);
    CHECK_THROWS_AS(run_labeled_ratio_study(c, {1.5}, {Method::da_adb}), ContractError);
}

TEST_CASE("text dataset with hashed features") {
    testing::TempDir dir;
    write_tsv(dir / "toy" / "train.tsv", text_rows(12));
    write_tsv(dir / "toy" / "dev.tsv", text_rows(3));
    write_tsv(dir / "toy" / "test.tsv", text_rows(4));
    ExperimentConfig c;
    c.dataset = "toy";
    c.data_dir = dir.path();
    c.known_ratio = 0.5;
    c.encoder.hash_dim = 256;
    c.representation.max_epochs = 10;
    const auto corpus = load_dataset(c);
    CHECK(corpus.train_x->rows() == 48);
    CHECK(corpus.train_x->cols() == 256);
    const auto r = run_experiment(c, corpus);
    REQUIRE(r.seeds[0].model);
    CHECK(r.seeds[0].model->num_known() == 2);
    CHECK(r.seeds[0].test_labels.size() == 16);

    c.dataset = "absent";
    CHECK_THROWS_AS(load_dataset(c), Error);
}

TEST_CASE("embedding files are matched to partitions") {
    testing::TempDir dir;
    write_tsv(dir / "toy" / "train.tsv", text_rows(5));
    write_tsv(dir / "toy" / "valid.tsv", text_rows(2));
    write_tsv(dir / "toy" / "test.tsv", text_rows(2));
    std::filesystem::create_directories(dir / "emb");
    auto fill = [](std::size_t n) {
        Matrix m(n, 6);
        for (std::size_t i = 0; i < n; ++i) m(i, i % 6) = 1.0 + static_cast<double>(i % 4);
        return m;
    };
    save_embeddings(dir / "emb" / "train.emb", fill(20));
    save_embeddings(dir / "emb" / "valid.emb", fill(8));
    save_embeddings(dir / "emb" / "test.emb", fill(8));

    ExperimentConfig c;
    c.dataset = "toy";
    c.data_dir = dir.path();
    c.encoder.kind = EncoderKind::emb;
    c.emb_file = (dir / "emb" / "{split}.emb").string();
    auto corpus = load_dataset(c);
    CHECK(corpus.test_x->rows() == 8);
    CHECK(corpus.train_x->cols() == 6);
    c.emb_file = (dir / "emb").string();
    CHECK(load_dataset(c).valid_x->rows() == 8);

    save_embeddings(dir / "emb" / "test.emb", fill(7));
    CHECK_THROWS_AS(load_dataset(c), FormatError);
}

TEST_CASE("radii csv and results table") {
    const auto b = BoundarySet::from_raw({0.0, 1.0});
    const auto csv = radii_csv(b, {"a", "b"});
    CHECK(csv.rfind("class,raw,radius\na,0,0.6931471805599453\n", 0) == 0);
    CHECK_THROWS_AS(radii_csv(b, {"a"}), ContractError);

    MetricsSummary s;
    s.runs = 3;
    s.acc_mean = 0.8903;
    s.f1_all_mean = 0.5;
    nlohmann::json r1 = {{"dataset", "stackoverflow"}, {"method", "da_adb"}, {"known_ratio", 0.5}, {"aggregate", to_json(s)}};
    nlohmann::json r2 = r1;
    r2["known_ratio"] = 0.25;
    const auto table = format_results_table({r1, r2});
    std::istringstream lines(table);
    std::string header, first, second;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(header.find("ACC") != std::string::npos);
    CHECK(first.find("25%") != std::string::npos);
    CHECK(second.find("89.03") != std::string::npos);
    CHECK(header.size() == first.size());
}
