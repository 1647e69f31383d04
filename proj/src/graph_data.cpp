#include "autolinc/graph_data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autolinc/rng.hpp"

namespace autolinc {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> count_train_classes(const Dataset& d) {
    std::vector<int> counts(d.num_classes, 0);
    for (int id : d.train) ++counts[d.labels[id]];
    return counts;
}

void Dataset::validate() const {
    if (num_nodes <= 0 || num_classes <= 0 || num_features <= 0)
        throw std::invalid_argument("Dataset: non-positive dimensions");
    if (features.rows() != num_nodes || features.cols() != num_features)
        throw std::invalid_argument("Dataset: feature matrix shape mismatch");
    if (static_cast<int>(labels.size()) != num_nodes)
        throw std::invalid_argument("Dataset: label count mismatch");
    for (int l : labels)
        if (l < 0 || l >= num_classes) throw std::invalid_argument("Dataset: label out of range");
    std::pair<int, int> prev{-1, -1};
    for (auto [u, v] : edges) {
        if (u < 0 || v >= num_nodes || u >= v)
            throw std::invalid_argument("Dataset: bad edge (self-loop, order, or range)");
        if (std::pair{u, v} <= prev) throw std::invalid_argument("Dataset: edges unsorted or duplicated");
        prev = {u, v};
    }
    std::set<int> seen;
    for (const auto* split : {&train, &val, &test})
        for (int id : *split) {
            if (id < 0 || id >= num_nodes) throw std::invalid_argument("Dataset: split id out of range");
            if (!seen.insert(id).second) throw std::invalid_argument("Dataset: overlapping splits");
        }
    auto counts = count_train_classes(*this);
    if (counts != train_class_counts) throw std::invalid_argument("Dataset: stale train_class_counts");
    for (int c : counts)
        if (c < 1) throw std::invalid_argument("Dataset: class missing from train split");
}

namespace {

[[noreturn]] void file_error(const std::string& file, int line, const std::string& msg) {
    throw std::runtime_error(file + ":" + std::to_string(line) + ": " + msg);
}

std::vector<double> parse_csv_doubles(const std::string& line, const std::string& file, int ln) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            size_t used;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("");
        } catch (const std::exception&) {
            file_error(file, ln, "malformed number '" + cell + "'");
        }
    }
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
    auto need = [&](const std::string& f) {
        fs::path p = fs::path(dir) / f;
        if (!fs::exists(p)) throw std::runtime_error("missing file: " + p.string());
        return p.string();
    };

    Dataset d;
    {
        std::ifstream in(need("meta.json"));
        json j = json::parse(in);
        d.name = j.value("name", "");
        d.num_nodes = j.at("num_nodes");
        d.num_features = j.at("num_features");
        d.num_classes = j.at("num_classes");
    }
    {
        std::string file = need("features.csv");
        std::ifstream in(file);
        d.features = Tensor(d.num_nodes, d.num_features);
        std::string line;
        for (int i = 0; i < d.num_nodes; ++i) {
            if (!std::getline(in, line)) file_error(file, i + 1, "unexpected end of file");
            auto row = parse_csv_doubles(line, file, i + 1);
            if (static_cast<int>(row.size()) != d.num_features)
                file_error(file, i + 1, "expected " + std::to_string(d.num_features) + " values");
            for (int k = 0; k < d.num_features; ++k) d.features(i, k) = row[k];
        }
    }
    {
        std::string file = need("edges.csv");
        std::ifstream in(file);
        std::string line;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            if (line.empty()) continue;
            auto vals = parse_csv_doubles(line, file, ln);
            if (vals.size() != 2) file_error(file, ln, "expected 'u,v'");
            d.edges.emplace_back(static_cast<int>(vals[0]), static_cast<int>(vals[1]));
        }
    }
    {
        std::string file = need("labels.csv");
        std::ifstream in(file);
        std::string line;
        for (int i = 0; i < d.num_nodes; ++i) {
            if (!std::getline(in, line)) file_error(file, i + 1, "unexpected end of file");
            auto vals = parse_csv_doubles(line, file, i + 1);
            if (vals.size() != 1) file_error(file, i + 1, "expected one integer");
            int l = static_cast<int>(vals[0]);
            if (l < 0 || l >= d.num_classes) file_error(file, i + 1, "label out of range");
            d.labels.push_back(l);
        }
    }
    {
        std::ifstream in(need("splits.json"));
        json j = json::parse(in);
        d.train = j.at("train").get<std::vector<int>>();
        d.val = j.at("val").get<std::vector<int>>();
        d.test = j.at("test").get<std::vector<int>>();
    }
    d.train_class_counts = count_train_classes(d);
    d.validate();
    return d;
}

void save_dataset(const Dataset& d, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "meta.json");
        out << json{{"name", d.name},
                    {"num_nodes", d.num_nodes},
                    {"num_features", d.num_features},
                    {"num_classes", d.num_classes}}
                   .dump(2)
            << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "features.csv");
        out.precision(17);
        for (int i = 0; i < d.num_nodes; ++i) {
            for (int k = 0; k < d.num_features; ++k) out << (k ? "," : "") << d.features(i, k);
            out << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "edges.csv");
        for (auto [u, v] : d.edges) out << u << "," << v << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "labels.csv");
        for (int l : d.labels) out << l << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "splits.json");
        out << json{{"train", d.train}, {"val", d.val}, {"test", d.test}}.dump() << "\n";
    }
}

Dataset gen_sbm(const SbmConfig& cfg) {
    if (cfg.p_out > cfg.p_in || cfg.p_in > 1 || cfg.p_out < 0)
        throw std::invalid_argument("gen_sbm: need 0 <= p_out <= p_in <= 1");
    if (cfg.train_per_class + cfg.val_per_class >= cfg.nodes_per_class)
        throw std::invalid_argument("gen_sbm: nodes_per_class too small for split sizes");

    Dataset d;
    d.name = "sbm";
    d.num_nodes = cfg.nodes_per_class * cfg.num_classes;
    d.num_features = cfg.feature_dim;
    d.num_classes = cfg.num_classes;
    d.labels.resize(d.num_nodes);
    for (int i = 0; i < d.num_nodes; ++i) d.labels[i] = i / cfg.nodes_per_class;

    auto erng = make_rng(cfg.seed, "sbm-edges");
    auto unif = [&](std::mt19937_64& r) { return (r() >> 11) * 0x1.0p-53; };
    for (int u = 0; u < d.num_nodes; ++u)
        for (int v = u + 1; v < d.num_nodes; ++v) {
            double p = d.labels[u] == d.labels[v] ? cfg.p_in : cfg.p_out;
            if (unif(erng) < p) d.edges.emplace_back(u, v);
        }

    auto frng = make_rng(cfg.seed, "sbm-features");
    // Box-Muller; std::normal_distribution is not bit-stable across libs
    auto gauss = [&]() {
        double u1 = unif(frng), u2 = unif(frng);
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    d.features = Tensor(d.num_nodes, d.num_features);
    for (int i = 0; i < d.num_nodes; ++i)
        for (int k = 0; k < d.num_features; ++k) {
            double mean = (k == d.labels[i] % d.num_features) ? cfg.feature_shift : 0.0;
            d.features(i, k) = mean + gauss();
        }

    auto srng = make_rng(cfg.seed, "sbm-splits");
    for (int c = 0; c < d.num_classes; ++c) {
        std::vector<int> ids(cfg.nodes_per_class);
        for (int i = 0; i < cfg.nodes_per_class; ++i) ids[i] = c * cfg.nodes_per_class + i;
        std::shuffle(ids.begin(), ids.end(), srng);
        for (int i = 0; i < cfg.nodes_per_class; ++i) {
            if (i < cfg.train_per_class)
                d.train.push_back(ids[i]);
            else if (i < cfg.train_per_class + cfg.val_per_class)
                d.val.push_back(ids[i]);
            else
                d.test.push_back(ids[i]);
        }
    }
    std::sort(d.train.begin(), d.train.end());
    std::sort(d.val.begin(), d.val.end());
    std::sort(d.test.begin(), d.test.end());
    d.train_class_counts = count_train_classes(d);
    d.validate();
    return d;
}

Dataset step_imbalance(const Dataset& d, double rho, uint64_t seed) {
    if (rho < 1) throw std::invalid_argument("step_imbalance: rho must be >= 1");
    Dataset out = d;
    int majority = (d.num_classes + 1) / 2;
    auto counts = count_train_classes(d);
    int n_major = 0;
    for (int c = 0; c < majority; ++c) n_major = std::max(n_major, counts[c]);
    int keep_minor = static_cast<int>(std::ceil(n_major / rho));
    if (keep_minor < 1) throw std::invalid_argument("step_imbalance: rho too large, class would vanish");

    auto rng = make_rng(seed, "step-imbalance");
    std::vector<std::vector<int>> per_class(d.num_classes);
    for (int id : d.train) per_class[d.labels[id]].push_back(id);
    out.train.clear();
    for (int c = 0; c < d.num_classes; ++c) {
        auto ids = per_class[c];
        if (c >= majority && static_cast<int>(ids.size()) > keep_minor) {
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(keep_minor);
        }
        out.train.insert(out.train.end(), ids.begin(), ids.end());
    }
    std::sort(out.train.begin(), out.train.end());
    out.train_class_counts = count_train_classes(out);
    out.validate();
    return out;
}

SparseMat norm_adj(const Dataset& d) {
    std::vector<double> deg(d.num_nodes, 1.0);  // self-loop
    for (auto [u, v] : d.edges) {
        deg[u] += 1;
        deg[v] += 1;
    }
    SparseMat m;
    m.rows = m.cols = d.num_nodes;
    auto w = [&](int u, int v) { return 1.0 / std::sqrt(deg[u] * deg[v]); };
    for (int i = 0; i < d.num_nodes; ++i) m.entries.push_back({i, i, w(i, i)});
    for (auto [u, v] : d.edges) {
        m.entries.push_back({u, v, w(u, v)});
        m.entries.push_back({v, u, w(v, u)});
    }
    return m;
}

}  // namespace autolinc
