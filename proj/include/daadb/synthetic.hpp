#pragma once

#include <cstdint>
#include <vector>

#include "daadb/dataset.hpp"
#include "daadb/matrix.hpp"

namespace daadb {

// Seeded Gaussian clusters plus uniform open-class samples that only appear in the test partition.
struct SyntheticSpec {
    std::size_t num_classes = 5;
    std::size_t dim = 5;
    double sigma = 1.0;
    // Class means are drawn uniformly from [-spread, spread]^dim, at least min_separation apart.
    double spread = 5.0;
    double min_separation = 6.0;
    std::size_t train_per_class = 200;
    std::size_t valid_per_class = 50;
    std::size_t test_per_class = 100;
    // Open samples are uniform over [-open_extent, open_extent]^dim.
    std::size_t open_test = 3000;
    double open_extent = 7.0;
    std::uint64_t seed = 0;

    friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

inline constexpr const char* kSyntheticOpenLabel = "uniform_open";

struct SyntheticCorpus {
    std::vector<Utterance> train, valid, test;
    Matrix train_x, valid_x, test_x;
    Matrix means;
};

SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

}  // namespace daadb
