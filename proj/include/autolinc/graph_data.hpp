#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "autolinc/graph.hpp"
#include "autolinc/tensor.hpp"

namespace autolinc {

struct Dataset {
    std::string name;
    int num_nodes = 0;
    int num_features = 0;
    int num_classes = 0;
    Tensor features;                         // C x d
    std::vector<std::pair<int, int>> edges;  // undirected, u < v, sorted, unique
    std::vector<int> labels;                 // length C
    std::vector<int> train, val, test;       // disjoint node ids, sorted
    std::vector<int> train_class_counts;     // length K, the terminal N

    void validate() const;  // throws on any invariant violation
};

std::vector<int> count_train_classes(const Dataset& d);

// Directory format: meta.json, features.csv, edges.csv, labels.csv,
// splits.json. Diagnostics name the offending file and line.
Dataset load_dataset(const std::string& dir);
void save_dataset(const Dataset& d, const std::string& dir);

struct SbmConfig {
    int nodes_per_class = 100;
    int num_classes = 3;
    double p_in = 0.1;
    double p_out = 0.01;
    int feature_dim = 16;
    double feature_shift = 2.0;
    int train_per_class = 20;
    int val_per_class = 30;
    uint64_t seed = 0;
};

// Stochastic block model with shifted-class-mean Gaussian features;
// deterministic for a fixed seed.
Dataset gen_sbm(const SbmConfig& cfg);

// Step imbalance: the first ceil(K/2) classes keep their full training
// count n, the rest are subsampled to ceil(n/rho). Val/test untouched.
Dataset step_imbalance(const Dataset& d, double rho, uint64_t seed);

// Symmetric normalization D^{-1/2} (A + I) D^{-1/2}.
SparseMat norm_adj(const Dataset& d);

}  // namespace autolinc
