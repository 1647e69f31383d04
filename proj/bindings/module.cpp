#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "autolinc/loss_check.hpp"
#include "autolinc/loss_zoo.hpp"
#include "autolinc/search.hpp"
#include "autolinc/trainer.hpp"

namespace py = pybind11;
using namespace autolinc;

namespace {

using Rows = std::vector<std::vector<double>>;

Tensor to_tensor(const Rows& rows) {
    if (rows.empty()) return Tensor();
    Tensor t(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw std::invalid_argument("ragged matrix");
        for (size_t c = 0; c < rows[r].size(); ++c) t(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return t;
}

Rows from_tensor(const Tensor& t) {
    Rows rows(t.rows(), std::vector<double>(t.cols()));
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c) rows[r][c] = t(r, c);
    return rows;
}

LossInputs to_inputs(const Rows& yhat, const Rows& y, const Rows& n) {
    LossInputs in;
    in.yhat = to_tensor(yhat);
    in.y = to_tensor(y);
    in.nmat = to_tensor(n);
    return in;
}

LossSpec spec_for(const std::string& loss) {
    if (is_preset(loss)) return LossSpec::from_preset(preset(loss));
    return LossSpec::from_tree(parse(loss));
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["bacc"] = m.bacc;
    d["macro_f1"] = m.macro_f1;
    d["recall"] = m.recall;
    return d;
}

}  // namespace

PYBIND11_MODULE(_autolinc, m) {
    m.doc() = "loss-function search for class-imbalanced node classification";

    // expressions
    m.def("parse", [](const std::string& s) { return serialize(parse(s)); },
          "parse and re-serialize an expression; throws on malformed input");
    m.def("canonical", [](const std::string& s) { return canonical(parse(s)); });
    m.def("num_rules", [](const std::string& s) { return preorder(parse(s)).size(); });
    m.def("legality", [](const std::string& s) {
        CheckVerdict v = legality(parse(s));
        return py::make_tuple(v.kind == CheckVerdict::Kind::Accept, v.detail);
    });
    m.def("eval_loss", [](const std::string& s, const Rows& yhat, const Rows& y, const Rows& n) {
        return eval_loss(parse(s), to_inputs(yhat, y, n)).value;
    });
    m.def("grad_yhat", [](const std::string& s, const Rows& yhat, const Rows& y, const Rows& n) {
        return from_tensor(grad_yhat(parse(s), to_inputs(yhat, y, n)).grad);
    });
    m.def("fingerprint", [](const std::string& s) {
        Fingerprint fp = fingerprint(parse(s));
        py::dict d;
        d["hash"] = fp.hash;
        d["all_zero"] = fp.all_zero;
        d["finite"] = fp.finite;
        return d;
    });
    m.def("basic_check", [](const std::string& s) {
        Archive empty;
        CheckVerdict v = basic_check(parse(s), empty, nullptr);
        return py::make_tuple(v.kind == CheckVerdict::Kind::Accept,
                              v.kind == CheckVerdict::Kind::Accept
                                  ? std::string()
                                  : std::string(reject_reason_name(v.reason)));
    });

    // presets
    m.def("list_presets", &list_presets);
    m.def("preset_expression", [](const std::string& name) { return preset(name).expression; });

    // datasets
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("name", &Dataset::name)
        .def_readonly("num_nodes", &Dataset::num_nodes)
        .def_readonly("num_features", &Dataset::num_features)
        .def_readonly("num_classes", &Dataset::num_classes)
        .def_readonly("edges", &Dataset::edges)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("train", &Dataset::train)
        .def_readonly("val", &Dataset::val)
        .def_readonly("test", &Dataset::test)
        .def_readonly("train_class_counts", &Dataset::train_class_counts)
        .def_property_readonly("features", [](const Dataset& d) { return from_tensor(d.features); });

    m.def(
        "gen_sbm",
        [](int num_classes, int nodes_per_class, double p_in, double p_out, int feature_dim,
           double feature_shift, int train_per_class, int val_per_class, uint64_t seed) {
            SbmConfig cfg;
            cfg.num_classes = num_classes;
            cfg.nodes_per_class = nodes_per_class;
            cfg.p_in = p_in;
            cfg.p_out = p_out;
            cfg.feature_dim = feature_dim;
            cfg.feature_shift = feature_shift;
            cfg.train_per_class = train_per_class;
            cfg.val_per_class = val_per_class;
            cfg.seed = seed;
            return gen_sbm(cfg);
        },
        py::arg("num_classes") = 3, py::arg("nodes_per_class") = 100, py::arg("p_in") = 0.1,
        py::arg("p_out") = 0.01, py::arg("feature_dim") = 16, py::arg("feature_shift") = 2.0,
        py::arg("train_per_class") = 20, py::arg("val_per_class") = 30, py::arg("seed") = 0);
    m.def("step_imbalance", &step_imbalance, py::arg("dataset"), py::arg("rho"),
          py::arg("seed") = 0);
    m.def("load_dataset", &load_dataset);
    m.def("save_dataset", &save_dataset);

    // training
    m.def(
        "train",
        [](const Dataset& data, const std::string& loss, int epochs, int hidden, double lr,
           double weight_decay, bool full_mode, uint64_t seed) {
            LossSpec spec = spec_for(loss);
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.hidden = hidden;
            cfg.lr = lr;
            cfg.weight_decay = weight_decay;
            cfg.full_mode = full_mode;
            cfg.seed = seed;
            TrainResult r = train(data, spec, cfg);
            py::dict d;
            d["reward"] = r.reward;
            d["rejected"] = r.rejected;
            d["epochs_run"] = r.history.size();
            if (!r.rejected) {
                d["val"] = metrics_dict(evaluate(r.model, data, "val", spec.pc_adjust()));
                d["test"] = metrics_dict(evaluate(r.model, data, "test", spec.pc_adjust()));
            }
            return d;
        },
        py::arg("dataset"), py::arg("loss"), py::arg("epochs") = 200, py::arg("hidden") = 64,
        py::arg("lr") = 0.1, py::arg("weight_decay") = 5e-4, py::arg("full_mode") = true,
        py::arg("seed") = 0);

    // search
    m.def("uct_score", &uct_score, py::arg("q"), py::arg("state_visits"),
          py::arg("action_visits"), py::arg("c"));
    m.def(
        "search",
        [](const Dataset& data, int episodes, int sims, double c, uint64_t seed, int proxy_epochs,
           int proxy_hidden, const std::string& toy_target) {
            SearchConfig cfg;
            cfg.episodes = episodes;
            cfg.sims = sims;
            cfg.c = c;
            cfg.seed = seed;
            cfg.proxy.epochs = proxy_epochs;
            cfg.proxy.hidden = proxy_hidden;
            if (!toy_target.empty()) cfg.toy_target = parse(toy_target);
            SearchResult r = run_search(data, cfg);
            py::list records;
            for (const auto& rec : r.archive.records()) {
                py::dict e;
                e["expr"] = rec.expr;
                e["canonical"] = rec.canonical;
                e["reward"] = rec.reward;
                e["status"] = rec.status;
                e["episode"] = rec.episode;
                records.append(std::move(e));
            }
            py::dict d;
            d["episodes_run"] = r.stats.episodes_run;
            d["proxy_trainings"] = r.stats.proxy_trainings;
            d["cache_hits"] = r.stats.cache_hits;
            d["rejections"] = r.stats.rejections;
            d["max_reward"] = r.archive.max_reward();
            d["records"] = std::move(records);
            return d;
        },
        py::arg("dataset"), py::arg("episodes") = 100, py::arg("sims") = 10,
        py::arg("c") = 1.4142135623730951, py::arg("seed") = 0, py::arg("proxy_epochs") = 100,
        py::arg("proxy_hidden") = 64, py::arg("toy_target") = "");
}
