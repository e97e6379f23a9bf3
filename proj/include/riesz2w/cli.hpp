#pragma once

// Batch command line: load measures, run audits, write versioned JSON
// reports (and CSV for sweeps).
//
// Exit codes: 0 success, 1 usage/input/precondition error, 2 anomaly
// (failed verification or monotonicity violation). Errors are reported on
// stderr as one-line JSON objects.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "riesz2w/constants.hpp"
#include "riesz2w/generators.hpp"
#include "riesz2w/measure_io.hpp"
#include "riesz2w/stopping.hpp"

namespace riesz2w::cli {

inline constexpr const char* kReportVersion = "1.0";

enum ExitCode { ok = 0, failure = 1, anomaly = 2 };

namespace detail {

using nlohmann::json;

struct Report {
  std::string command;
  json params = json::object();
  json seeds = json::object();
  json results = json::object();
  double seconds = 0.0;

  json to_json() const {
    return {{"version", kReportVersion},
            {"command", command},
            {"params", params},
            {"seeds", seeds},
            {"results", results},
            {"timings", {{"seconds", seconds}}}};
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::input, "cannot write " + path);
  out << text;
}

inline std::vector<double> load_values(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::input, "cannot open value file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::input, path + ": " + e.what());
  }
  require(j.is_array(), ErrorKind::input, path + ": expected a JSON array of numbers");
  std::vector<double> v;
  for (const auto& x : j) {
    require(x.is_number(), ErrorKind::input, path + ": expected a JSON array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

inline json error_json(const std::string& kind, const std::string& message, int code) {
  return {{"error", kind}, {"message", message}, {"exit_code", code}};
}

inline double parse_extended(const std::string& s, const char* what) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), ErrorKind::input, std::string(what) + ": not a number: " + s);
    return v;
  } catch (const std::logic_error&) {
    fail(ErrorKind::input, std::string(what) + ": not a number: " + s);
  }
}

/// Options shared by the constants and audit verbs.
struct AuditFlags {
  int n = 0;
  double d = 0.0;
  int grids = 4;
  std::uint64_t seed = 0;
  double eps = 0.08;
  int r = 16;
  double C0 = 16.0;
  bool no_eta = false;
  bool no_energy = false;
  std::size_t eta_min_atoms = 16;
  double tol = 1e-10;
  std::size_t max_iter = 100000;

  void add(CLI::App* app) {
    app->add_option("-n", n, "ambient dimension (default: from the measures)");
    app->add_option("-d", d, "kernel dimension")->required();
    app->add_option("--grids", grids, "random grids in the test family")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--eps", eps, "goodness epsilon")->capture_default_str();
    app->add_option("-r", r, "goodness depth r")->capture_default_str();
    app->add_option("--C0", C0, "Whitney dilation C0")->capture_default_str();
    app->add_flag("--no-eta", no_eta, "skip the UFD constant");
    app->add_flag("--no-energy", no_energy, "skip the energy witness");
    app->add_option("--eta-min-atoms", eta_min_atoms, "atoms a cube needs to enter the UFD infimum")
        ->capture_default_str();
    app->add_option("--tol", tol, "power-iteration tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "power-iteration budget")->capture_default_str();
  }

  AuditConfig config() const {
    AuditConfig cfg;
    cfg.family.grids = grids;
    cfg.family.seed = seed;
    cfg.norm.tol = tol;
    cfg.norm.max_iterations = max_iter;
    cfg.norm.seed = seed;
    cfg.goodness = {eps, r};
    cfg.C0 = C0;
    cfg.compute_eta = !no_eta;
    cfg.compute_energy = !no_energy;
    cfg.eta.min_atoms = eta_min_atoms;
    cfg.eta.seed = seed;
    return cfg;
  }

  json params() const {
    return {{"n", n},       {"d", d},           {"grids", grids},   {"eps", eps},
            {"r", r},       {"C0", C0},         {"eta", !no_eta},   {"energy", !no_energy},
            {"eta_min_atoms", eta_min_atoms}, {"tol", tol}, {"max_iter", max_iter}};
  }
};

inline json audit_results(const ConstantsReport& rep) {
  json j = rep.to_json();
  j["metadata"].erase("seconds");
  return j;
}

inline RieszDimension dimension_for(int n, double d, const DiscreteMeasure& a) {
  const int nn = n > 0 ? n : a.dim();
  require(a.dim() == nn, ErrorKind::dimension_mismatch,
          "measure dimension " + std::to_string(a.dim()) + " differs from -n " + std::to_string(nn));
  return RieszDimension(nn, d);
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using nlohmann::json;
  using detail::Report;

  CLI::App app{"riesz2w: two-weight audits for d-dimensional Riesz transforms", "riesz2w"};
  app.require_subcommand(1);
  int threads = 0;
  std::string out_path, csv_path;
  app.add_option("--threads", threads, "worker threads (0: RIESZ2W_THREADS, else 1)");

  Report rep;
  int exit_code = ExitCode::ok;
  std::function<void()> action;

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--csv", csv_path, "CSV path");
  };

  // constants
  detail::AuditFlags cflags;
  std::string sigma_path, weight_path;
  {
    auto* sub = app.add_subcommand("constants", "A2, testing, operator norm, UFD and energy witnesses for one pair");
    sub->add_option("--sigma", sigma_path, "sigma measure JSON")->required();
    sub->add_option("--weight", weight_path, "w measure JSON")->required();
    cflags.add(sub);
    add_out(sub);
    sub->callback([&] {
      action = [&] {
        const DiscreteMeasure sigma = load_measure(sigma_path), w = load_measure(weight_path);
        const RieszDimension rd = detail::dimension_for(cflags.n, cflags.d, sigma);
        const ConstantsReport cr = theorem_audit(rd, sigma, w, cflags.config());
        rep.params = cflags.params();
        rep.params["n"] = rd.n();
        rep.params["sigma"] = sigma_path;
        rep.params["weight"] = weight_path;
        rep.seeds = {{"seed", cflags.seed}};
        rep.results = detail::audit_results(cr);
        if (!csv_path.empty())
          detail::write_text(csv_path, ConstantsReport::csv_header() + "\n" + cr.csv_row() + "\n");
      };
    });
  }

  // audit
  std::string manifest_path;
  detail::AuditFlags aflags;
  {
    auto* sub = app.add_subcommand("audit", "theorem audit over a corpus manifest");
    sub->add_option("--manifest", manifest_path,
                    "JSON array of {\"sigma\": path, \"weight\": path, \"label\": name}")
        ->required();
    aflags.add(sub);
    add_out(sub);
    sub->callback([&] {
      action = [&] {
        std::ifstream in(manifest_path);
        require(static_cast<bool>(in), ErrorKind::input, "cannot open manifest " + manifest_path);
        json m;
        try {
          in >> m;
        } catch (const json::parse_error& e) {
          fail(ErrorKind::input, manifest_path + ": " + e.what());
        }
        require(m.is_array(), ErrorKind::input, manifest_path + ": expected an array of pairs");
        const auto base = std::filesystem::path(manifest_path).parent_path();
        auto resolve = [&](const std::string& p) {
          const std::filesystem::path q(p);
          return (q.is_absolute() ? q : base / q).string();
        };
        json pairs = json::array();
        std::string csv = "label," + ConstantsReport::csv_header() + "\n";
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
          const auto& e = m[i];
          require(e.is_object() && e.contains("sigma") && e.contains("weight"), ErrorKind::input,
                  "manifest entry " + std::to_string(i) + " needs sigma and weight");
          const std::string label = e.value("label", "pair" + std::to_string(i));
          const DiscreteMeasure sigma = load_measure(resolve(e["sigma"].get<std::string>()));
          const DiscreteMeasure w = load_measure(resolve(e["weight"].get<std::string>()));
          const RieszDimension rd = detail::dimension_for(aflags.n, aflags.d, sigma);
          const ConstantsReport cr = theorem_audit(rd, sigma, w, aflags.config());
          lo = std::min(lo, cr.ratio_full);
          hi = std::max(hi, cr.ratio_full);
          pairs.push_back({{"label", label}, {"report", detail::audit_results(cr)}});
          csv += label + "," + cr.csv_row() + "\n";
        }
        rep.params = aflags.params();
        rep.params["manifest"] = manifest_path;
        rep.seeds = {{"seed", aflags.seed}};
        rep.results = {{"pairs", pairs},
                       {"ratio_min", m.empty() ? 0.0 : lo},
                       {"ratio_max", hi},
                       {"band_width", m.empty() || lo <= 0.0 ? 0.0 : hi / lo}};
        if (!csv_path.empty()) detail::write_text(csv_path, csv);
      };
    });
  }

  // grid
  GoodnessParams gp{0.1, 8};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  int dim = 2, window = 32, kmin = 0, kmax = 40;
  double lambda = 1.0;
  std::string measure_path;
  {
    auto* grid = app.add_subcommand("grid", "random dyadic grid utilities");
    grid->require_subcommand(1);
    auto* pbad = grid->add_subcommand("pbad", "Monte-Carlo probability that a cube is bad");
    pbad->add_option("--eps", gp.epsilon, "goodness epsilon")->capture_default_str();
    pbad->add_option("-r", gp.r, "goodness depth")->capture_default_str();
    pbad->add_option("--trials", trials, "Monte-Carlo trials")->capture_default_str();
    pbad->add_option("--seed", seed, "seed")->capture_default_str();
    pbad->add_option("-n", dim, "dimension")->capture_default_str();
    pbad->add_option("--window", window, "levels in each random grid")->capture_default_str();
    add_out(pbad);
    pbad->callback([&] {
      action = [&] {
        const ProportionEstimate e = p_bad_mc(gp, dim, trials, seed, window);
        rep.command = "grid pbad";
        rep.params = {{"eps", gp.epsilon}, {"r", gp.r}, {"trials", trials}, {"n", dim}, {"window", window}};
        rep.seeds = {{"seed", seed}};
        rep.results = {{"p_bad", e.value},
                       {"ci_low", e.ci_low},
                       {"ci_high", e.ci_high},
                       {"hits", e.hits},
                       {"trials", e.trials},
                       {"heuristic_bound", std::exp2(-gp.epsilon * gp.r) / gp.epsilon}};
      };
    });
    auto* describe = grid->add_subcommand("describe", "print the shift bits of a seeded grid");
    describe->add_option("-n", dim, "dimension")->capture_default_str();
    describe->add_option("--kmin", kmin, "coarsest level")->capture_default_str();
    describe->add_option("--kmax", kmax, "finest level")->capture_default_str();
    describe->add_option("--seed", seed, "seed")->capture_default_str();
    describe->add_option("--lambda", lambda, "dilation")->capture_default_str();
    add_out(describe);
    describe->callback([&] {
      action = [&] {
        const ShiftedGrid g(dim, kmin, kmax, seed, lambda);
        rep.command = "grid describe";
        rep.params = {{"n", dim}, {"kmin", kmin}, {"kmax", kmax}, {"lambda", lambda}};
        rep.seeds = {{"seed", seed}};
        rep.results = g.to_json();
      };
    });
    auto* adm = grid->add_subcommand("admissible", "check that a measure charges no face of the grid");
    adm->add_option("--measure", measure_path, "measure JSON")->required();
    adm->add_option("--kmin", kmin, "coarsest level (default: from the measure)");
    adm->add_option("--kmax", kmax, "finest level (default: from the measure)");
    adm->add_option("--seed", seed, "seed")->capture_default_str();
    add_out(adm);
    adm->callback([&, adm] {
      action = [&, adm] {
        const DiscreteMeasure mu = load_measure(measure_path);
        require(!mu.empty(), ErrorKind::input, "grid admissible: empty measure");
        auto [lo, hi] = auto_window(enclosing_cube(mu, mu));
        if (adm->count("--kmin")) lo = kmin;
        if (adm->count("--kmax")) hi = kmax;
        const ShiftedGrid g(mu.dim(), lo, hi, seed);
        rep.command = "grid admissible";
        rep.params = {{"measure", measure_path}, {"kmin", lo}, {"kmax", hi}};
        rep.seeds = {{"seed", seed}};
        const auto root = common_cube(g, mu);
        rep.results = {{"admissible", is_admissible(mu, g)},
                       {"common_cube_level", root ? json(root->level) : json(nullptr)}};
      };
    });
  }

  // energy
  std::vector<double> center;
  double side = 1.0, dd = 0.0;
  int level = 0;
  bool use_grid = false;
  {
    auto* sub = app.add_subcommand("energy", "energy E(w,K) in all forms and Poisson averages of sigma");
    sub->add_option("--weight", weight_path, "w measure JSON")->required();
    sub->add_option("--sigma", sigma_path, "sigma measure JSON (Poisson averages)");
    sub->add_option("-d", dd, "kernel dimension (required with --sigma)");
    sub->add_option("--center", center, "cube center")->required()->delimiter(',');
    sub->add_option("--side", side, "cube side")->capture_default_str();
    sub->add_option("--level", level, "use the grid cube of this level containing the center");
    sub->add_option("--seed", seed, "grid seed")->capture_default_str();
    add_out(sub);
    sub->callback([&, sub] {
      use_grid = sub->count("--level") > 0;
      action = [&] {
        const DiscreteMeasure w = load_measure(weight_path);
        require(static_cast<int>(center.size()) == w.dim(), ErrorKind::dimension_mismatch,
                "energy: center has the wrong dimension");
        Cube k(center, side);
        std::optional<ShiftedGrid> g;
        if (use_grid) {
          g.emplace(w.dim(), level - 8, level + 40, seed);
          k = g->cube(g->cube_containing(center, level));
        }
        json forms = json::object();
        for (int form = 1; form <= (g ? 3 : 2); ++form) {
          const EnergyValue e = energy(w, k, form, g ? &*g : nullptr);
          forms[std::to_string(form)] = {{"squared", e.squared}, {"value", e.value}};
        }
        rep.command = "energy";
        rep.params = {{"weight", weight_path}, {"center", center}, {"side", side}};
        if (use_grid) rep.params["level"] = level;
        rep.seeds = {{"seed", seed}};
        rep.results = {{"cube", {{"lo", k.corner()}, {"side", k.side()}}},
                       {"w_mass", cube_mass(w, k)},
                       {"energy", forms}};
        if (!sigma_path.empty()) {
          const DiscreteMeasure sigma = load_measure(sigma_path);
          const RieszDimension rd(sigma.dim(), dd);
          json pa = json::object();
          for (auto kind : {PoissonKind::reproducing, PoissonKind::gradient, PoissonKind::gradient_plus})
            pa[to_string(kind)] = poisson_avg(kind, rd, sigma, {}, k);
          rep.params["sigma"] = sigma_path;
          rep.params["d"] = dd;
          rep.results["poisson"] = pa;
        }
      };
    });
  }

  // stopping
  std::string f_path, g_path, R_text;
  StoppingConfig scfg;
  bool no_tent = false;
  {
    auto* sub = app.add_subcommand("stopping", "stopping tree, Carleson and quasi-orthogonality checks");
    sub->add_option("--sigma", sigma_path, "sigma measure JSON")->required();
    sub->add_option("--weight", weight_path, "w measure JSON")->required();
    sub->add_option("-d", dd, "kernel dimension")->required();
    sub->add_option("--f", f_path, "values of f on sigma atoms (JSON array; default 1)");
    sub->add_option("--g", g_path, "values of g on w atoms (JSON array; default 1)");
    sub->add_option("--gamma", scfg.thresholds.gamma, "average-rule multiplier")->capture_default_str();
    sub->add_option("--energy-mult", scfg.thresholds.energy_multiplier, "energy-rule multiplier")
        ->capture_default_str();
    sub->add_option("--R", R_text, "energy-rule constant: a number, inf, or auto")->required();
    sub->add_option("--eps", scfg.goodness.epsilon, "goodness epsilon")->capture_default_str();
    sub->add_option("-r", scfg.goodness.r, "goodness depth and sublattice step")->capture_default_str();
    sub->add_option("--C0", scfg.C0, "Whitney dilation")->capture_default_str();
    sub->add_option("--seed", seed, "grid seed")->capture_default_str();
    sub->add_flag("--no-tent", no_tent, "skip the tent size functional");
    add_out(sub);
    sub->callback([&] {
      action = [&] {
        const DiscreteMeasure sigma = load_measure(sigma_path), w = load_measure(weight_path);
        const RieszDimension rd(sigma.dim(), dd);
        const int n = rd.n();
        std::vector<double> f = f_path.empty() ? std::vector<double>(sigma.size(), 1.0) : detail::load_values(f_path);
        std::vector<double> g = g_path.empty() ? std::vector<double>(w.size(), 1.0) : detail::load_values(g_path);
        require(f.size() == sigma.size(), ErrorKind::dimension_mismatch, "stopping: f needs one value per sigma atom");
        require(g.size() == w.size(), ErrorKind::dimension_mismatch, "stopping: g needs one value per w atom");
        double R = 0.0;
        json R_info;
        if (R_text == "auto") {
          AuditConfig ac;
          ac.family.seed = seed;
          ac.compute_eta = false;
          ac.compute_energy = false;
          const ConstantsReport cr = theorem_audit(rd, sigma, w, ac);
          R = std::sqrt(cr.A2.value) + cr.T.value + cr.Tstar.value;
          R_info = {{"source", "auto"}, {"A2", cr.A2.value}, {"T", cr.T.value}, {"Tstar", cr.Tstar.value}};
        } else {
          R = detail::parse_extended(R_text, "--R");
          R_info = {{"source", "flag"}};
        }
        scfg.thresholds.R = R;
        const auto [lo, hi] = auto_window(enclosing_cube(sigma, w), 12, 44);
        const CounterRng master(seed);
        const ShiftedGrid primal(n, lo, hi, master.derive(1)()), dual(n, lo, hi, master.derive(2)());
        const auto root = common_cube(primal, sigma);
        require(root.has_value(), ErrorKind::range, "stopping: no grid cube holds all of sigma; try another seed");
        const HaarCoefficients hc_f = martingale_decompose(sigma, primal, *root, f);
        const StoppingTree tree = build_stopping_tree(rd, hc_f, sigma, w, primal, dual, scfg);
        const CarlesonResult car = carleson_check(tree, sigma);
        const Cube root_cube = primal.cube(*root);
        const int inner = root->level + scfg.goodness.r;
        const auto g_forest = inner_forest(w, g, 1, dual, root_cube, inner);
        const Projections pr = stopping_projections(hc_f, primal, g_forest, dual, tree);
        const auto x_forest = inner_forest(w, w.coords(), n, dual, root_cube, inner);
        json fe = nullptr;
        if (car.max_ratio <= 0.5) {
          std::vector<double> af(f.size());
          for (std::size_t i = 0; i < f.size(); ++i) af[i] = std::abs(f[i]);
          fe = functional_energy_sum(rd, sigma, af, w, tree, x_forest, dual);
        }
        json tent = nullptr;
        if (!no_tent) {
          const TentMeasure lam = TentMeasure::from_haar(x_forest, dual);
          CubeFamily fam = default_family(sigma, w, {1, seed, false});
          std::erase_if(fam.cubes, [&](const Cube& q) { return !root_cube.contains(q); });
          const WhitneyProvider prov = [&](const Cube& q) -> std::vector<Cube> {
            const int top = whitney_top_level(q, dual, scfg.goodness);
            if (top < dual.k_min() || top > dual.k_max()) return {};
            WhitneyOptions wo;
            wo.C0 = scfg.C0;
            for (const auto& a : lam.atoms)
              if (q.contains(a.x)) wo.probes.push_back(a.x);
            if (wo.probes.empty()) return {};
            return to_cubes(whitney(q, dual, scfg.goodness, wo), dual);
          };
          const Witness ts = tent_size(lam, sigma, rd, fam, root_cube, prov);
          tent = {{"value", ts.value}, {"argmax", riesz2w::detail::cube_json(ts.cube)}, {"evaluated", ts.evaluated}};
        }
        rep.command = "stopping";
        rep.params = {{"sigma", sigma_path},
                      {"weight", weight_path},
                      {"f", f_path},
                      {"g", g_path},
                      {"d", dd},
                      {"gamma", scfg.thresholds.gamma},
                      {"energy_mult", scfg.thresholds.energy_multiplier},
                      {"R", R_text},
                      {"eps", scfg.goodness.epsilon},
                      {"r", scfg.goodness.r},
                      {"C0", scfg.C0},
                      {"window", {lo, hi}}};
        rep.seeds = {{"seed", seed}, {"primal", master.derive(1)()}, {"dual", master.derive(2)()}};
        rep.results = {{"tree", tree.to_json()},
                       {"R", std::isfinite(R) ? json(R) : json("inf")},
                       {"R_info", R_info},
                       {"carleson", {{"max_ratio", car.max_ratio},
                                     {"argmax_node", car.argmax_node},
                                     {"degenerate_nodes", car.degenerate_nodes}}},
                       {"quasi_orthogonality", pr.quasi_orthogonality},
                       {"unassigned_g_cells", pr.unassigned_g},
                       {"functional_energy", fe},
                       {"tent_size", tent}};
      };
    });
  }

  // monotonicity
  MonotonicityOptions mopt;
  std::size_t mtrials = 500;
  {
    auto* sub = app.add_subcommand("monotonicity", "randomized monotonicity-ratio audit");
    sub->add_option("-n", dim, "dimension")->capture_default_str();
    sub->add_option("-d", dd, "kernel dimension (default n)");
    sub->add_option("--trials", mtrials, "trials")->capture_default_str();
    sub->add_option("--seed", seed, "seed")->capture_default_str();
    sub->add_option("--sigma-atoms", mopt.sigma_atoms, "sigma atoms per trial")->capture_default_str();
    sub->add_option("--w-atoms", mopt.w_atoms, "w atoms per trial")->capture_default_str();
    sub->add_option("--separation", mopt.separation, "P = separation * Q")->capture_default_str();
    sub->add_option("--reach", mopt.reach, "sigma support radius in units of l(Q)")->capture_default_str();
    sub->add_option("--bins", mopt.bins, "histogram bins")->capture_default_str();
    add_out(sub);
    sub->callback([&] {
      action = [&] {
        const RieszDimension rd(dim, dd > 0.0 ? dd : dim);
        const MonotonicityResult mr = monotonicity_audit(rd, mtrials, seed, mopt);
        rep.command = "monotonicity";
        rep.params = {{"n", dim},
                      {"d", rd.d()},
                      {"trials", mtrials},
                      {"sigma_atoms", mopt.sigma_atoms},
                      {"w_atoms", mopt.w_atoms},
                      {"separation", mopt.separation},
                      {"reach", mopt.reach},
                      {"bins", mopt.bins}};
        rep.seeds = {{"seed", seed}};
        rep.results = {{"max_ratio", mr.max_ratio},
                       {"argmax_trial", mr.argmax_trial},
                       {"anomalies", mr.anomalies},
                       {"trials", mr.trials},
                       {"bin_edges", mr.bin_edges},
                       {"histogram", mr.histogram}};
        if (!csv_path.empty()) {
          std::ostringstream os;
          os.precision(17);
          os << "bin_low,bin_high,count\n";
          for (std::size_t b = 0; b < mr.histogram.size(); ++b)
            os << mr.bin_edges[b] << ',' << mr.bin_edges[b + 1] << ',' << mr.histogram[b] << '\n';
          detail::write_text(csv_path, os.str());
        }
        if (mr.anomalies > 0) exit_code = ExitCode::anomaly;
      };
    });
  }

  // generate / counterexample
  GeneratorSpec gspec;
  std::string kind_text = "lebesgue", measure_out;
  std::vector<double> cube_lo;
  double cube_side = 1.0;
  auto write_generated = [&](const GeneratorSpec& spec, bool verify) {
    const auto [mu, record] = generate(spec);
    save_measure(mu, measure_out);
    rep.results = {{"measure", measure_out}, {"atoms", mu.size()}, {"total_mass", mu.total_mass()}};
    if (!record.is_null()) {
      const std::string side_path =
          (std::filesystem::path(measure_out).replace_extension("").string()) + ".verify.json";
      detail::write_text(side_path, record.dump(1) + "\n");
      rep.results["verification"] = record;
      rep.results["verification_path"] = side_path;
      if (verify && !record.value("pass", false)) exit_code = ExitCode::anomaly;
    }
  };
  {
    auto* sub = app.add_subcommand("generate", "write a generated weight as measure JSON");
    sub->add_option("--kind", kind_text, "lebesgue | power | cantor | hyperplane | counterexample")
        ->capture_default_str();
    sub->add_option("-n", gspec.n, "dimension")->capture_default_str();
    sub->add_option("--resolution", gspec.resolution, "grid resolution")->capture_default_str();
    sub->add_option("--alpha", gspec.alpha, "power exponent")->capture_default_str();
    sub->add_option("-d", gspec.d, "dimension parameter (cantor, counterexample)")->capture_default_str();
    sub->add_option("--depth", gspec.depth, "cantor depth")->capture_default_str();
    sub->add_option("--thickness", gspec.thickness, "hyperplane thickness")->capture_default_str();
    sub->add_option("--eps", gspec.epsilon, "counterexample epsilon")->capture_default_str();
    sub->add_option("--angle", gspec.angle, "hyperplane rotation angle")->capture_default_str();
    sub->add_option("--cube-lo", cube_lo, "sampling cube lower corner")->delimiter(',');
    sub->add_option("--cube-side", cube_side, "sampling cube side")->capture_default_str();
    sub->add_option("--measure-out", measure_out, "measure JSON path")->required();
    add_out(sub);
    sub->callback([&] {
      action = [&] {
        gspec.kind = parse_generator_kind(kind_text);
        gspec.cube = Cube::from_corner(cube_lo.empty() ? Point(gspec.n, 0.0) : Point(cube_lo), cube_side);
        rep.command = "generate";
        rep.seeds = {{"seed", nullptr}};
        rep.params = {{"kind", kind_text},     {"n", gspec.n},         {"resolution", gspec.resolution},
                      {"alpha", gspec.alpha},  {"d", gspec.d},         {"depth", gspec.depth},
                      {"thickness", gspec.thickness}, {"eps", gspec.epsilon}, {"angle", gspec.angle},
                      {"cube_lo", gspec.cube.corner()}, {"cube_side", cube_side}};
        write_generated(gspec, false);
      };
    });
  }
  {
    auto* sub = app.add_subcommand("counterexample", "build and verify the four-atom counterexample weight");
    sub->add_option("--eps", gspec.epsilon, "epsilon in (0,1)")->capture_default_str();
    sub->add_option("-n", gspec.n, "dimension (2)")->capture_default_str();
    sub->add_option("-d", gspec.d, "kernel dimension")->capture_default_str();
    sub->add_option("--out", measure_out, "measure JSON path; the record goes to <stem>.verify.json")
        ->required();
    sub->add_option("--report", out_path, "report path (default: stdout)");
    sub->callback([&] {
      action = [&] {
        gspec.kind = GeneratorKind::counterexample;
        rep.command = "counterexample";
        rep.seeds = {{"seed", nullptr}};
        rep.params = {{"eps", gspec.epsilon}, {"n", gspec.n}, {"d", gspec.d}};
        write_generated(gspec, true);
      };
    });
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << detail::error_json("usage", e.what(), ExitCode::failure).dump() << '\n';
    return ExitCode::failure;
  }
  if (threads > 0) set_threads(threads);
  for (const auto* sub : app.get_subcommands())
    if (rep.command.empty()) rep.command = sub->get_name();
  try {
    action();
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::anomaly ? ExitCode::anomaly : ExitCode::failure;
    err << detail::error_json(to_string(e.kind()), e.what(), code).dump() << '\n';
    return code;
  } catch (const std::exception& e) {
    err << detail::error_json("internal", e.what(), ExitCode::failure).dump() << '\n';
    return ExitCode::failure;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string text = rep.to_json().dump(1) + "\n";
  try {
    if (out_path.empty())
      out << text;
    else
      detail::write_text(out_path, text);
  } catch (const Error& e) {
    err << detail::error_json(to_string(e.kind()), e.what(), ExitCode::failure).dump() << '\n';
    return ExitCode::failure;
  }
  return exit_code;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace riesz2w::cli
