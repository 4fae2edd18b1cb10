#include "carp/cli.hpp"

#include "carp/influence.hpp"
#include "carp/io.hpp"
#include "carp/meanfield.hpp"
#include "carp/mle.hpp"
#include "carp/montecarlo.hpp"
#include "carp/parallel.hpp"
#include "carp/synthetic.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <variant>

namespace carp::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolName = "carp";

/// One CSV/JSON output table. Cells are strings or numbers.
struct Table {
  using Cell = std::variant<std::string, double, long long>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out += csv_escape(v);
            } else if constexpr (std::is_same_v<T, double>) {
              out += format_number(v);
            } else {
              out += std::to_string(v);
            }
          },
          row[c]);
    }
    out += '\n';
  }
  return out;
}

ordered_json table_json(const Table& table) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json r = ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit([&](const auto& v) { r[table.columns[c]] = v; }, row[c]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Flags shared by most subcommands.
struct Common {
  std::string network_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::string params_path;
  double tol = 1e-10;
  long max_iter = 100000;
  std::string init = "likelihoods";
  double damping = 1.0;
};

class Command {
 public:
  Command(std::string name, std::ostream& out, std::ostream& err)
      : name_(std::move(name)), out_(out), err_(err) {}

  ModelParams params(const Common& c) {
    ModelParams p;
    if (!c.params_path.empty()) {
      const std::string text = read_file(c.params_path);
      note_input("params", text);
      try {
        const json doc = json::parse(text);
        const json& block = doc.contains("params") ? doc.at("params") : doc;
        p = {block.at("alpha").get<double>(), block.at("beta").get<double>(),
             block.at("gamma").get<double>()};
      } catch (const json::exception& e) {
        throw DomainError(std::string("cannot read parameters: ") + e.what());
      }
    }
    if (c.alpha) p.alpha = *c.alpha;
    if (c.beta) p.beta = *c.beta;
    if (c.gamma) p.gamma = *c.gamma;
    if (c.params_path.empty() && !(c.alpha && c.beta && c.gamma)) {
      throw CLI::ValidationError("--alpha, --beta and --gamma (or --params) are required");
    }
    p.validate();
    params_ = p;
    return p;
  }

  RiskNetwork network(const Common& c) {
    const std::string text = read_file(c.network_path);
    note_input("network", text);
    return parse_network_json(text);
  }

  EventPanel panel(const std::string& path) {
    const std::string text = read_file(path);
    note_input("panel", text);
    return parse_panel_csv(text);
  }

  void note_input(const std::string& role, const std::string& bytes) {
    inputs_[role] = fingerprint(bytes);
  }

  void set_seed(std::uint64_t seed) { seed_ = seed; }

  ordered_json provenance() const {
    ordered_json p;
    p["tool"] = kToolName;
    p["version"] = CARP_VERSION;
    p["command"] = name_;
    if (seed_) p["seed"] = *seed_;
    if (params_) {
      p["params"] = {{"alpha", params_->alpha}, {"beta", params_->beta}, {"gamma", params_->gamma}};
    }
    ordered_json in = ordered_json::object();
    for (const auto& [k, v] : inputs_) in[k] = v;
    p["inputs"] = in;
    return p;
  }

  /// Writes the table (CSV or JSON) and, for CSV written to a file, a JSON
  /// sidecar `<out>.json` holding `meta` and provenance.
  void emit(const Common& c, const Table& table, ordered_json meta = ordered_json::object()) {
    meta["provenance"] = provenance();
    if (c.format == "json") {
      ordered_json doc = meta;
      doc["rows"] = table_json(table);
      write(c.out_path, doc.dump(2) + "\n");
      return;
    }
    write(c.out_path, to_csv(table));
    if (!c.out_path.empty()) write(c.out_path + ".json", meta.dump(2) + "\n");
  }

  void emit_json(const std::string& path, ordered_json doc) {
    doc["provenance"] = provenance();
    write(path, doc.dump(2) + "\n");
  }

  void write(const std::string& path, const std::string& content) {
    if (path.empty()) {
      out_ << content;
    } else {
      write_file_atomic(path, content);
    }
  }

  std::ostream& diag() { return err_; }

 private:
  std::string name_;
  std::ostream& out_;
  std::ostream& err_;
  std::map<std::string, std::string> inputs_;
  std::optional<std::uint64_t> seed_;
  std::optional<ModelParams> params_;
};

void add_params(CLI::App* sub, Common& c) {
  sub->add_option("--alpha", c.alpha, "internal activation multiplier")->check(CLI::PositiveNumber);
  sub->add_option("--beta", c.beta, "external activation multiplier")->check(CLI::PositiveNumber);
  sub->add_option("--gamma", c.gamma, "continuation multiplier")->check(CLI::PositiveNumber);
  sub->add_option("--params", c.params_path, "JSON file with alpha/beta/gamma (e.g. fit output)")
      ->check(CLI::ExistingFile);
}

void add_output(CLI::App* sub, Common& c) {
  sub->add_option("-o,--out", c.out_path, "output file (stdout if omitted)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_network(CLI::App* sub, Common& c) {
  sub->add_option("-n,--network", c.network_path, "network JSON file")->required();
}

void add_fixed_point(CLI::App* sub, Common& c) {
  sub->add_option("--tol", c.tol, "fixed-point tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter, "fixed-point sweep limit")->check(CLI::PositiveNumber);
  sub->add_option("--init", c.init, "zeros, likelihoods or ones")
      ->check(CLI::IsMember({"zeros", "likelihoods", "ones"}));
  sub->add_option("--damping", c.damping, "relaxation weight in (0,1]")->check(CLI::Range(1e-12, 1.0));
}

FixedPointOptions fixed_point_options(const Common& c) {
  FixedPointOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  o.damping = c.damping;
  o.init = c.init == "zeros" ? FixedPointInit::Zeros
           : c.init == "ones" ? FixedPointInit::Ones
                              : FixedPointInit::Likelihoods;
  return o;
}

ordered_json steady_meta(const SteadyState& s) {
  return {{"converged", s.converged}, {"iterations", s.iterations}, {"residual", s.residual}};
}

SteadyState solve_steady(Command& cmd, const RiskNetwork& net, const ModelParams& p, const Common& c) {
  SteadyState s = fixed_point(net, p, fixed_point_options(c));
  if (!s.converged) {
    cmd.diag() << "warning: steady state did not converge (residual " << s.residual << " after "
               << s.iterations << " sweeps)\n";
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascading alternating renewal process toolkit for risk networks", kToolName};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: CARP_THREADS or all cores)");

  Common c;

  // generate
  SyntheticSpec gen;
  std::string gen_network_out, gen_panel_out;
  bool gen_dormant_start = false;
  std::string gen_layout = "uniform";
  auto* generate = app.add_subcommand("generate", "random network plus a simulated event panel");
  generate->add_option("--nodes", gen.nodes)->check(CLI::PositiveNumber);
  generate->add_option("--edges", gen.edges)->check(CLI::NonNegativeNumber);
  generate->add_option("--lmin", gen.likelihood_min)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  generate->add_option("--lmax", gen.likelihood_max)->check(CLI::Range(1e-12, 1.0 - 1e-12));
  generate->add_option("--alpha", gen.params.alpha)->check(CLI::PositiveNumber);
  generate->add_option("--beta", gen.params.beta)->check(CLI::PositiveNumber);
  generate->add_option("--gamma", gen.params.gamma)->check(CLI::PositiveNumber);
  generate->add_option("--length", gen.panel_length, "panel months")->check(CLI::Range(2, 1 << 24));
  generate->add_option("--seed", gen.seed);
  generate->add_flag("--dormant-start", gen_dormant_start, "start the panel all-dormant");
  generate->add_option("--likelihoods", gen_layout, "uniform or stratified")
      ->check(CLI::IsMember({"uniform", "stratified"}));
  generate->add_option("--network-out", gen_network_out)->required();
  generate->add_option("--panel-out", gen_panel_out)->required();

  // fit
  std::string fit_panel;
  FitConfig fit_cfg;
  ModelParams fit_init{1e-3, 1e-3, 1.0};
  auto* fitcmd = app.add_subcommand("fit", "maximum-likelihood fit of alpha, beta, gamma");
  add_network(fitcmd, c);
  fitcmd->add_option("-p,--panel", fit_panel, "event panel CSV")->required();
  fitcmd->add_option("--starts", fit_cfg.starts, "random starts besides the initial guess")
      ->check(CLI::NonNegativeNumber);
  fitcmd->add_option("--seed", fit_cfg.seed);
  fitcmd->add_option("--max-iter", fit_cfg.max_iter)->check(CLI::PositiveNumber);
  fitcmd->add_option("--tol", fit_cfg.tol)->check(CLI::PositiveNumber);
  fitcmd->add_option("--alpha0", fit_init.alpha)->check(CLI::PositiveNumber);
  fitcmd->add_option("--beta0", fit_init.beta)->check(CLI::PositiveNumber);
  fitcmd->add_option("--gamma0", fit_init.gamma)->check(CLI::PositiveNumber);
  bool fit_trace = false;
  fitcmd->add_flag("--trace", fit_trace, "include the per-iteration trace");
  fitcmd->add_option("-o,--out", c.out_path, "output JSON (stdout if omitted)");

  // steady-state / transitions
  auto* steady = app.add_subcommand("steady-state", "mean-field stationary activation probabilities");
  auto* transitions = app.add_subcommand("transitions", "steady-state transition fractions");
  for (auto* sub : {steady, transitions}) {
    add_network(sub, c);
    add_params(sub, c);
    add_fixed_point(sub, c);
    add_output(sub, c);
  }

  // simulate / temporal-influence
  SimulationConfig sim;
  std::string sim_init = "dormant";
  bool append_steady = false;
  RiskId source = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo activation frequencies");
  auto* temporal = app.add_subcommand("temporal-influence", "one-hop/two-hop response to activating a risk");
  for (auto* sub : {simulate_cmd, temporal}) {
    add_network(sub, c);
    add_params(sub, c);
    add_output(sub, c);
    sub->add_option("--runs", sim.runs)->check(CLI::PositiveNumber);
    sub->add_option("--horizon", sim.horizon, "months recorded, including month 0")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", sim.seed);
  }
  simulate_cmd->add_option("--init", sim_init, "dormant, active or steady")
      ->check(CLI::IsMember({"dormant", "active", "steady"}));
  simulate_cmd->add_flag("--append-steady-state", append_steady,
                         "append a final 'inf' row with the mean-field values");
  temporal->add_option("--init", sim_init, "dormant or steady")
      ->check(CLI::IsMember({"dormant", "steady"}));
  temporal->add_option("--source", source, "risk id activated at month 0")->required();

  // influence / category-influence
  auto* influence = app.add_subcommand("influence", "pairwise knockout influence");
  auto* category = app.add_subcommand("category-influence", "category-level knockout influence");
  for (auto* sub : {influence, category}) {
    add_network(sub, c);
    add_params(sub, c);
    add_fixed_point(sub, c);
    add_output(sub, c);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }
  set_thread_limit(threads);

  CLI::App* chosen = app.get_subcommands().front();
  Command cmd(chosen->get_name(), out, err);
  try {
    if (chosen == generate) {
      gen.stationary_start = !gen_dormant_start;
      gen.layout = gen_layout == "stratified" ? LikelihoodLayout::Stratified : LikelihoodLayout::Uniform;
      cmd.set_seed(gen.seed);
      const SyntheticData data = generate_synthetic(gen);
      save_network(data.network, gen_network_out);
      save_panel(data.panel, gen_panel_out);
      const NetworkStats st = data.network.stats();
      err << "generated " << st.nodes << " risks, " << st.edges << " edges (average degree "
          << st.average_degree << "), " << data.panel.months() << " months\n";
      return kSuccess;
    }

    if (chosen == fitcmd) {
      fit_cfg.keep_trace = fit_trace;
      cmd.set_seed(fit_cfg.seed);
      const RiskNetwork net = cmd.network(c);
      const EventPanel panel = cmd.panel(fit_panel);
      const FitResult r = fit(panel, net, fit_init, fit_cfg);
      ordered_json doc;
      doc["params"] = {{"alpha", r.params.alpha}, {"beta", r.params.beta}, {"gamma", r.params.gamma}};
      doc["log_likelihood"] = r.log_likelihood;
      doc["iterations"] = r.iterations;
      doc["converged"] = r.converged;
      doc["best_start"] = r.best_start;
      doc["gradient_norm"] = r.gradient_norm;
      doc["degenerate"] = r.degenerate ? ordered_json(*r.degenerate) : ordered_json(nullptr);
      if (fit_trace) {
        ordered_json trace = ordered_json::array();
        for (const auto& t : r.trace) {
          trace.push_back({{"alpha", t.params.alpha}, {"beta", t.params.beta},
                           {"gamma", t.params.gamma}, {"log_likelihood", t.log_likelihood}});
        }
        doc["trace"] = std::move(trace);
      }
      if (r.degenerate) err << "warning: degenerate panel: " << *r.degenerate << "\n";
      cmd.emit_json(c.out_path, std::move(doc));
      if (!r.converged) {
        err << "warning: optimizer did not converge within " << fit_cfg.max_iter << " iterations\n";
        return kNonConvergence;
      }
      return kSuccess;
    }

    const RiskNetwork net = cmd.network(c);
    const ModelParams p = cmd.params(c);

    if (chosen == steady || chosen == transitions) {
      const SteadyState s = solve_steady(cmd, net, p, c);
      Table t;
      ordered_json meta = steady_meta(s);
      if (chosen == steady) {
        t.columns = {"id", "name", "category", "likelihood", "p_hat"};
        for (const Risk& r : net.risks()) {
          t.rows.push_back({static_cast<long long>(r.id), r.name, std::string(to_string(r.category)),
                            r.likelihood, s.p_hat[r.id]});
        }
        meta["stationarity_residual"] = stationarity_residual(s.p_hat, net, p);
      } else {
        if (!s.converged) return kNonConvergence;
        const TransitionFractions f = transition_fractions(s, net, p);
        t.columns = {"id", "name", "category", "A_int", "A_ext", "A_rec", "a_int", "a_ext", "a_rec",
                     "ratio_exact", "ratio_taylor"};
        for (const Risk& r : net.risks()) {
          const ExtIntRatio ratio = ext_int_ratio(s, net, p, r.id);
          t.rows.push_back({static_cast<long long>(r.id), r.name, std::string(to_string(r.category)),
                            f.A_int[r.id], f.A_ext[r.id], f.A_rec[r.id], f.a_int[r.id],
                            f.a_ext[r.id], f.a_rec[r.id], ratio.exact, ratio.taylor});
        }
        const ExtIntRatio mean = mean_ext_int_ratio(s, net, p);
        meta["mean_ratio_exact"] = mean.exact;
        meta["mean_ratio_taylor"] = mean.taylor;
        meta["mean_a_int"] = f.a_int.mean();
        meta["mean_a_ext"] = f.a_ext.mean();
        meta["mean_a_rec"] = f.a_rec.mean();
      }
      cmd.emit(c, t, std::move(meta));
      return s.converged ? kSuccess : kNonConvergence;
    }

    if (chosen == simulate_cmd || chosen == temporal) {
      cmd.set_seed(sim.seed);
      std::optional<SteadyState> s;
      if (sim_init == "steady" || append_steady) {
        s = fixed_point(net, p);
        if (!s->converged) throw ConvergenceError("steady state for initialization did not converge");
      }
      if (sim_init == "active") sim.initial = InitialState::active();
      if (sim_init == "steady") sim.initial = InitialState::bernoulli(s->p_hat);

      Table t;
      ordered_json meta;
      meta["runs"] = sim.runs;
      meta["horizon"] = sim.horizon;
      meta["init"] = sim_init;
      if (chosen == simulate_cmd) {
        const FrequencyTrajectory traj = simulate(net, p, sim);
        const Eigen::MatrixXd freq = traj.frequencies();
        t.columns.push_back("t");
        for (const Risk& r : net.risks()) t.columns.push_back("risk_" + std::to_string(r.id));
        for (int m = 0; m < sim.horizon; ++m) {
          std::vector<Table::Cell> row{std::to_string(m)};
          for (int i = 0; i < net.size(); ++i) row.emplace_back(freq(i, m));
          t.rows.push_back(std::move(row));
        }
        if (append_steady) {
          std::vector<Table::Cell> row{std::string("inf")};
          for (int i = 0; i < net.size(); ++i) row.emplace_back(s->p_hat[i]);
          t.rows.push_back(std::move(row));
        }
      } else {
        const TemporalInfluence ti = temporal_influence(net, p, source, sim);
        const Eigen::VectorXd one = ti.one_hop_curve();
        const Eigen::VectorXd two = ti.two_hop_curve();
        meta["source"] = source;
        meta["one_hop_size"] = ti.one_hop.size();
        meta["two_hop_size"] = ti.two_hop.size();
        t.columns = {"t"};
        if (one.size()) t.columns.push_back("one_hop");
        if (two.size()) t.columns.push_back("two_hop");
        if (!one.size()) err << "notice: source " << source << " has no neighbors; one-hop curve omitted\n";
        if (!two.size()) err << "notice: source " << source << " has no two-hop neighbors; two-hop curve omitted\n";
        for (int m = 0; m < sim.horizon; ++m) {
          std::vector<Table::Cell> row{static_cast<long long>(m)};
          if (one.size()) row.emplace_back(one[m]);
          if (two.size()) row.emplace_back(two[m]);
          t.rows.push_back(std::move(row));
        }
      }
      cmd.emit(c, t, std::move(meta));
      return kSuccess;
    }

    if (chosen == influence || chosen == category) {
      const InfluenceMatrix infl = influence_matrix(net, p, fixed_point_options(c));
      Table t;
      ordered_json meta;
      meta["tol"] = infl.tol;
      if (chosen == influence) {
        t.columns = {"source", "target", "influence"};
        for (int i = 0; i < net.size(); ++i) {
          for (int j = 0; j < net.size(); ++j) {
            t.rows.push_back({static_cast<long long>(i), static_cast<long long>(j), infl.values(i, j)});
          }
        }
        int matching = 0;
        for (int i = 0; i < net.size(); ++i) matching += top_targets_are_neighbors(infl, net, i);
        meta["rows_with_neighbors_on_top"] = matching;
      } else {
        const CategoryInfluence ci = category_influence(infl, net);
        if (ci.constant) err << "warning: category influence is constant; normalized to zeros\n";
        t.columns = {"from", "to", "raw", "normalized"};
        for (std::size_t a = 0; a < ci.categories.size(); ++a) {
          for (std::size_t b = 0; b < ci.categories.size(); ++b) {
            const auto ia = static_cast<Eigen::Index>(a);
            const auto ib = static_cast<Eigen::Index>(b);
            t.rows.push_back({std::string(to_string(ci.categories[a])),
                              std::string(to_string(ci.categories[b])), ci.raw(ia, ib),
                              ci.normalized(ia, ib)});
          }
        }
        meta["constant"] = ci.constant;
      }
      cmd.emit(c, t, std::move(meta));
      return kSuccess;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  }
  return kUsageError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace carp::cli
