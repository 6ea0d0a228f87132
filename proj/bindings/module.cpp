#include "causalcast/backtest.hpp"
#include "causalcast/cli.hpp"
#include "causalcast/evaluation.hpp"
#include "causalcast/ingest.hpp"
#include "causalcast/numerics.hpp"
#include "causalcast/panel.hpp"
#include "causalcast/registry.hpp"
#include "causalcast/selectors.hpp"
#include "causalcast/synthlab.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace causalcast;
using nlohmann::json;

namespace {

std::vector<std::string> date_strings(const std::vector<MonthStamp>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (const auto& d : dates) out.push_back(d.str());
  return out;
}

json parse_json(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("params: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

AlignedPanel make_panel(const std::vector<std::string>& dates, const Vector& target, const Matrix& features,
                        const std::vector<std::string>& names, const std::string& target_name) {
  std::vector<MonthStamp> stamps;
  stamps.reserve(dates.size());
  for (const auto& d : dates) stamps.push_back(MonthStamp::parse(d));
  return AlignedPanel(std::move(stamps), target, features, names, {}, true, target_name);
}

py::list diagnostics_list(const selectors::FeatureSet& fs) {
  py::list out;
  for (const auto& d : fs.diagnostics)
    out.append(py::dict(py::arg("name") = d.name, py::arg("statistic") = d.statistic, py::arg("p_value") = d.p_value,
                        py::arg("weight") = d.weight));
  return out;
}

py::dict graph_dict(const selectors::DynamicGraph& g) {
  return py::dict(py::arg("variables") = g.variables, py::arg("S") = g.S, py::arg("W") = g.W, py::arg("h") = g.h);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Causal feature selection and expanding-window forecasting for monthly panels";
  py::register_exception<Error>(m, "CausalcastError", PyExc_RuntimeError);

  py::class_<AlignedPanel>(m, "Panel")
      .def(py::init(&make_panel), py::arg("dates"), py::arg("target"), py::arg("features"), py::arg("feature_names"),
           py::arg("target_name") = "target")
      .def_property_readonly("dates", [](const AlignedPanel& p) { return date_strings(p.dates()); })
      .def_property_readonly("target", &AlignedPanel::target)
      .def_property_readonly("features", &AlignedPanel::features)
      .def_property_readonly("feature_names", &AlignedPanel::feature_names)
      .def_property_readonly("target_name", &AlignedPanel::target_name)
      .def_property_readonly("rows", &AlignedPanel::rows)
      .def("head", &AlignedPanel::head, py::arg("count"))
      .def("to_csv", &ingest::write_panel_csv)
      .def_static("from_csv", [](const std::string& text) { return ingest::read_panel_csv(text); }, py::arg("text"))
      .def("__len__", &AlignedPanel::rows)
      .def("__repr__", [](const AlignedPanel& p) {
        return "<Panel " + std::to_string(p.rows()) + " x " + std::to_string(p.num_features()) + " target=" +
               p.target_name() + ">";
      });

  py::class_<selectors::FeatureSet>(m, "FeatureSet")
      .def_readonly("selector_id", &selectors::FeatureSet::selector_id)
      .def_readonly("candidates", &selectors::FeatureSet::candidates)
      .def_readonly("selected", &selectors::FeatureSet::selected)
      .def_readonly("empty_informative", &selectors::FeatureSet::empty_informative)
      .def_readonly("warnings", &selectors::FeatureSet::warnings)
      .def_property_readonly("diagnostics", &diagnostics_list)
      .def("__contains__", &selectors::FeatureSet::contains);

  py::class_<numerics::OlsFit>(m, "OlsFit")
      .def_readonly("beta", &numerics::OlsFit::beta)
      .def_readonly("residuals", &numerics::OlsFit::residuals)
      .def_readonly("rss", &numerics::OlsFit::rss)
      .def_readonly("rank", &numerics::OlsFit::rank)
      .def_readonly("rank_deficient", &numerics::OlsFit::rank_deficient)
      .def_readonly("warnings", &numerics::OlsFit::warnings);

  py::class_<backtest::BacktestLedger>(m, "Ledger")
      .def_property_readonly("dates",
                             [](const backtest::BacktestLedger& l) {
                               std::vector<std::string> out;
                               for (const auto& r : l.records) out.push_back(r.date.str());
                               return out;
                             })
      .def_property_readonly("y_true",
                             [](const backtest::BacktestLedger& l) {
                               std::vector<double> out;
                               for (const auto& r : l.records) out.push_back(r.y_true);
                               return out;
                             })
      .def_property_readonly("y_pred",
                             [](const backtest::BacktestLedger& l) {
                               std::vector<double> out;
                               for (const auto& r : l.records) out.push_back(r.y_pred);
                               return out;
                             })
      .def_property_readonly("selected",
                             [](const backtest::BacktestLedger& l) {
                               std::vector<std::vector<std::string>> out;
                               for (const auto& r : l.records) out.push_back(r.selected.selected);
                               return out;
                             })
      .def_property_readonly("regimes",
                             [](const backtest::BacktestLedger& l) {
                               std::vector<std::string> out;
                               for (const auto& r : l.records) out.emplace_back(ingest::to_string(r.regime));
                               return out;
                             })
      .def("to_csv", py::overload_cast<const backtest::BacktestLedger&>(&backtest::ledger_csv))
      .def("manifest_json", [](const backtest::BacktestLedger& l) { return backtest::manifest(l).dump(); })
      .def_static("from_csv", &backtest::read_ledger_csv, py::arg("text"))
      .def("__len__", &backtest::BacktestLedger::size);

  // numerics
  m.def("ols_fit", &numerics::ols_fit, py::arg("X"), py::arg("y"), py::arg("intercept") = true);
  m.def(
      "f_test_nested",
      [](double rss_r, double rss_f, int q, Eigen::Index n, Eigen::Index k) {
        const auto r = numerics::f_test_nested(rss_r, rss_f, q, n, k);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("rss_restricted"), py::arg("rss_full"), py::arg("q"), py::arg("n"), py::arg("k_full"));
  m.def("f_sf", &numerics::f_sf, py::arg("f"), py::arg("df1"), py::arg("df2"));
  m.def("pearson", &numerics::pearson, py::arg("x"), py::arg("y"));
  m.def(
      "partial_correlation",
      [](const Vector& x, const Vector& y, const Matrix& Z) {
        const auto r = numerics::partial_correlation(x, y, Z);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("x"), py::arg("y"), py::arg("Z"));
  m.def(
      "kmeans",
      [](const Matrix& points, int k, std::uint64_t seed) {
        const auto r = numerics::kmeans(points, k, seed);
        return py::make_tuple(r.assignments, r.centroids);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "fastica",
      [](const Matrix& X, int n_components, std::uint64_t seed) {
        const auto r = numerics::fastica(X, n_components, seed);
        return py::make_tuple(r.unmixing, r.sources);
      },
      py::arg("X"), py::arg("n_components"), py::arg("seed") = 0);
  m.def(
      "acyclicity",
      [](const Matrix& S) {
        const auto r = numerics::acyclicity(S);
        return py::make_tuple(r.h, r.gradient);
      },
      py::arg("S"));

  // panel and ingest
  m.def(
      "build_design",
      [](const AlignedPanel& panel, int p) {
        const auto d = build_design(panel, p);
        std::vector<std::string> labels;
        for (const auto& c : d.columns) labels.push_back(c.source + "_lag" + std::to_string(c.lag));
        return py::make_tuple(d.y, d.X, labels);
      },
      py::arg("panel"), py::arg("p") = 1);
  m.def(
      "load_panel",
      [](const std::string& fredmd_csv, const std::string& prices_csv, const std::string& groups_csv, int shift_months,
         const std::string& target_name) {
        const auto groups = groups_csv.empty() ? std::map<std::string, int>{} : ingest::parse_groups(read_file(groups_csv));
        const auto fred = ingest::parse_fredmd(read_file(fredmd_csv), groups);
        const auto returns = ingest::prices_to_returns(ingest::parse_prices(read_file(prices_csv)));
        return align_and_shift(returns, ingest::transform_panel(fred), shift_months, target_name);
      },
      py::arg("fredmd_csv"), py::arg("prices_csv"), py::arg("groups_csv") = "", py::arg("shift_months") = 1,
      py::arg("target_name") = "SPY");

  // selectors
  m.def("known_selectors", &selectors::known_selectors);
  m.def(
      "select",
      [](const AlignedPanel& panel, const std::string& selector, int p, const std::string& params, std::uint64_t seed) {
        selectors::SelectorContext ctx;
        ctx.seed = seed;
        return selectors::make_selector(selector, parse_json(params), p)->select(panel, build_design(panel, p), ctx);
      },
      py::arg("panel"), py::arg("selector"), py::arg("p") = 1, py::arg("params_json") = "{}", py::arg("seed") = 0);

  // backtest and evaluation
  m.def(
      "run_backtest",
      [](const AlignedPanel& panel, const std::string& selector, const std::string& params, Eigen::Index window, int p,
         int reselect_every, std::uint64_t seed, const std::string& calendar) {
        backtest::BacktestConfig c;
        c.selector_id = selector;
        c.params = parse_json(params);
        c.window = window;
        c.p = p;
        c.reselect_every = reselect_every;
        c.seed = seed;
        py::gil_scoped_release release;
        return backtest::run_backtest(panel, ingest::load_calendar(calendar), c);
      },
      py::arg("panel"), py::arg("selector") = "granger", py::arg("params_json") = "{}", py::arg("window") = 60,
      py::arg("p") = 1, py::arg("reselect_every") = 1, py::arg("seed") = 0, py::arg("calendar") = "");
  m.def(
      "rolling_rmse",
      [](const backtest::BacktestLedger& l, int h) {
        const auto v = evaluation::rolling_rmse(l, h);
        return py::make_tuple(date_strings(v.dates), v.values);
      },
      py::arg("ledger"), py::arg("h") = 12);
  m.def(
      "rolling_mae",
      [](const backtest::BacktestLedger& l, int h) {
        const auto v = evaluation::rolling_mae(l, h);
        return py::make_tuple(date_strings(v.dates), v.values);
      },
      py::arg("ledger"), py::arg("h") = 12);
  m.def(
      "regime_metrics_json",
      [](const backtest::BacktestLedger& l, const std::string& calendar) {
        return evaluation::to_json(evaluation::regime_metrics(l, ingest::load_calendar(calendar))).dump();
      },
      py::arg("ledger"), py::arg("calendar") = "");
  m.def(
      "strategy_returns",
      [](const backtest::BacktestLedger& l) {
        const auto s = evaluation::strategy_returns(l);
        return py::make_tuple(date_strings(s.dates), s.returns, s.positions);
      },
      py::arg("ledger"));
  m.def(
      "portfolio_stats",
      [](const std::vector<double>& returns) {
        const auto s = evaluation::portfolio_stats(returns);
        return py::dict(py::arg("count") = s.count, py::arg("expected_return_annualized") = s.expected_return,
                        py::arg("sharpe") = s.sharpe, py::arg("sortino") = s.sortino, py::arg("flags") = s.flags);
      },
      py::arg("returns"));
  m.def(
      "portfolio_metrics_json",
      [](const backtest::BacktestLedger& l, const std::string& calendar) {
        const auto s = evaluation::strategy_returns(l);
        return evaluation::to_json(evaluation::portfolio_metrics(s, ingest::load_calendar(calendar))).dump();
      },
      py::arg("ledger"), py::arg("calendar") = "");
  m.def("mae_increase_pct", &evaluation::mae_increase_pct, py::arg("normal_mae"), py::arg("crisis_mae"));

  // synthetic ground truth
  m.def(
      "generate_svar",
      [](const std::string& spec_json) {
        auto sample = synthlab::generate_svar(synthlab::spec_from_json(parse_json(spec_json)));
        py::dict truth = graph_dict(sample.truth);
        truth["target_parents"] = synthlab::true_parents(sample.truth, sample.panel.target_name());
        return py::make_tuple(std::move(sample.panel), truth);
      },
      py::arg("spec_json") = "{}");
  m.def(
      "score_sets",
      [](const std::vector<std::string>& selected, const std::vector<std::string>& truth) {
        const auto s = synthlab::score_sets(selected, truth);
        return py::make_tuple(s.precision, s.recall, s.f1);
      },
      py::arg("selected"), py::arg("truth"));

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "causalcast");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));

  m.attr("__version__") = CAUSALCAST_VERSION;
}
