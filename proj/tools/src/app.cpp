#include "d2cli/app.hpp"

#include "d2/admm.hpp"
#include "d2/badmm.hpp"
#include "d2/clustering.hpp"
#include "d2/dataio.hpp"
#include "d2/errors.hpp"
#include "d2/fulllp.hpp"
#include "d2/ibp.hpp"
#include "d2/metrics.hpp"
#include "d2/subgradient.hpp"
#include "d2/transport.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace d2::cli {

namespace {

/// Flags that parse but do not fit together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> tables;
  int workers = 1;
  std::uint64_t seed = 1;

  std::string input, input_b, out, residuals, labels_out, centroids_out, trace_out;
  std::string solver = "badmm";
  int m = 0;
  double rho0 = 2.0;
  int tau = 10;
  int iters = 100;
  std::string rule = "r1";
  int t_admm = 10;
  double alpha = 0.5, zeta = 10.0;
  double eps0 = 0.1;
  std::string ibp_variant = "fixed";

  int k = 2;
  int max_outer = 30;
  bool no_prune = false;
  bool trace_time = false;
  std::string seeding = "plusplus";

  SynthSpec synth;

  std::string truth, pred, metric = "all";

  double eta = 2.0, t_total = 10.0;
};

std::string quote(const std::string& s) {
  std::ostringstream q;
  q << std::quoted(s);
  return q.str();
}

void report(std::ostream& err, const std::string& kind, const std::string& message,
            std::optional<int> iteration = std::nullopt) {
  err << "error kind=" << kind;
  if (iteration) err << " iteration=" << *iteration;
  err << " message=" << quote(message) << '\n';
}

TableRegistry load_tables(const std::vector<std::string>& specs) {
  TableRegistry reg;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string id =
        eq == std::string::npos ? std::filesystem::path(spec).stem().string() : spec.substr(0, eq);
    if (id.empty() || path.empty()) throw InputError("--table expects id=path or a path");
    reg[id] = read_cost_table_file(path, id);
  }
  return reg;
}

std::unique_ptr<WorkerPool> make_pool(int workers) {
  if (workers < 1) throw InputError("--workers must be positive");
  return workers > 1 ? std::make_unique<WorkerPool>(static_cast<std::size_t>(workers)) : nullptr;
}

// Writes to `path`, or to `fallback` when the path is empty.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  fn(file);
}

std::string real(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void forbid(const CLI::App& app, const std::vector<std::string>& flags, const std::string& why) {
  for (const auto& f : flags)
    if (const CLI::Option* opt = app.get_option_no_throw(f); opt && opt->count() > 0) throw UsageError(f + " " + why);
}

ConsensusRule parse_rule(const std::string& r) { return r == "r2" ? ConsensusRule::r2 : ConsensusRule::r1; }

CentroidSolver parse_cluster_solver(const std::string& s) {
  if (s == "admm") return CentroidSolver::admm;
  if (s == "subgrad") return CentroidSolver::subgrad;
  return CentroidSolver::badmm;
}

// Flags that only make sense for some centroid solvers.
void check_solver_flags(const CLI::App& app, const std::string& solver) {
  if (solver != "badmm") forbid(app, {"--rule"}, "requires --solver badmm");
  if (solver != "badmm" && solver != "admm") forbid(app, {"--rho0"}, "requires --solver badmm or admm");
  if (solver != "admm") forbid(app, {"--t-admm"}, "requires --solver admm");
  if (solver != "subgrad") forbid(app, {"--alpha", "--zeta"}, "requires --solver subgrad");
  if (solver != "ibp") forbid(app, {"--eps0", "--ibp-variant"}, "requires --solver ibp");
  if (solver == "admm" || solver == "fulllp") forbid(app, {"--tau"}, "is not used by " + solver);
}

ClusterParams cluster_params(const Options& o) {
  ClusterParams p;
  p.k = o.k;
  p.m = o.m;
  p.solver = parse_cluster_solver(o.solver);
  p.badmm.rho0 = o.rho0;
  p.badmm.tau = o.tau;
  p.badmm.inner_iters = o.iters;
  p.badmm.rule = parse_rule(o.rule);
  p.admm.rho0 = o.rho0;
  p.admm.t_admm = o.t_admm;
  p.admm.outer_iters = o.iters;
  p.subgrad.alpha = o.alpha;
  p.subgrad.zeta = o.zeta;
  p.subgrad.tau = o.tau;
  p.subgrad.iters = o.iters;
  p.max_outer = o.max_outer;
  p.prune = !o.no_prune;
  p.seed = o.seed;
  p.workers = o.workers;
  p.seeding = o.seeding == "uniform" ? SeedStrategy::uniform : SeedStrategy::plus_plus;
  return p;
}

int cmd_distance(const Options& o, std::ostream& out) {
  const auto tables = load_tables(o.tables);
  const auto a = read_dataset_file(o.input, tables);
  const auto b = o.input_b.empty() ? a : read_dataset_file(o.input_b, tables);
  const auto pool = make_pool(o.workers);
  Eigen::MatrixXd dist(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for_each_index(pool.get(), a.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < b.size(); ++j)
      dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wasserstein2(a[i], b[j]);
  });
  emit(o.out, out, [&](std::ostream& s) {
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
      for (Eigen::Index j = 0; j < dist.cols(); ++j) s << (j ? "," : "") << real(dist(i, j));
      s << '\n';
    }
  });
  return 0;
}

int cmd_barycenter(const CLI::App& app, const Options& o, std::ostream& out) {
  check_solver_flags(app, o.solver);
  if (o.solver != "badmm" && !o.residuals.empty())
    throw UsageError("--residuals requires --solver badmm");
  const auto tables = load_tables(o.tables);
  const auto data = read_dataset_file(o.input, tables);
  if (data.empty()) throw InputError("barycenter needs at least one distribution");
  const MemberList members = member_list(data);
  const int m = o.m > 0 ? o.m : average_support_size(members);
  const DiscreteDistribution init = init_centroid(members, m, o.seed);
  const auto pool = make_pool(o.workers);
  RunControl control;
  control.pool = pool.get();

  Centroid result;
  ResidualTrace trace;
  if (o.solver == "badmm") {
    BadmmParams p;
    p.rho0 = o.rho0;
    p.tau = o.tau;
    p.inner_iters = o.iters;
    p.rule = parse_rule(o.rule);
    auto r = badmm_centroid(members, init, nullptr, p, control);
    result = std::move(r.centroid);
    trace = std::move(r.trace);
  } else if (o.solver == "admm") {
    AdmmParams p;
    p.rho0 = o.rho0;
    p.t_admm = o.t_admm;
    p.outer_iters = o.iters;
    result = admm_centroid(members, init, nullptr, p, control).centroid;
  } else if (o.solver == "subgrad") {
    SubgradParams p;
    p.alpha = o.alpha;
    p.zeta = o.zeta;
    p.tau = o.tau;
    p.iters = o.iters;
    result = subgrad_centroid(members, init, p, control).centroid;
  } else if (o.solver == "ibp") {
    IbpParams p;
    p.epsilon0 = o.eps0;
    p.iters = o.iters;
    p.tau = o.tau;
    p.variant = o.ibp_variant == "v1"   ? IbpVariant::relocate_keep
                : o.ibp_variant == "v2" ? IbpVariant::relocate_restart
                                        : IbpVariant::fixed_support;
    result = ibp_centroid(members, init, p, control).centroid;
  } else {
    FullLpParams p;
    p.outer_iters = o.iters;
    result = fulllp_centroid(members, init, p, control).centroid;
  }

  emit(o.out, out, [&](std::ostream& s) { write_dataset(s, {result.distribution}); });
  out << "objective=" << real(result.objective) << '\n';
  if (!o.residuals.empty())
    emit(o.residuals, out, [&](std::ostream& s) {
      s << "iteration,primal,dual\n";
      for (std::size_t i = 0; i < trace.primal.size(); ++i)
        s << i << ',' << real(trace.primal[i]) << ',' << real(trace.dual[i]) << '\n';
    });
  return 0;
}

int cmd_cluster(const CLI::App& app, const Options& o, std::ostream& out) {
  check_solver_flags(app, o.solver);
  const auto tables = load_tables(o.tables);
  const auto data = read_dataset_file(o.input, tables);
  const ClusterModel model = d2_cluster(data, cluster_params(o));
  emit(o.labels_out, out, [&](std::ostream& s) { write_labels(s, model.labels); });
  if (!o.centroids_out.empty())
    emit(o.centroids_out, out, [&](std::ostream& s) { write_dataset(s, model.centroids); });
  if (!o.trace_out.empty())
    emit(o.trace_out, out, [&](std::ostream& s) {
      s << "outer_iter,objective,label_changes" << (o.trace_time ? ",elapsed_sec" : "") << '\n';
      for (const auto& t : model.trace) {
        s << t.outer_iter << ',' << real(t.objective) << ',' << t.label_changes;
        if (o.trace_time) s << ',' << real(t.elapsed_sec);
        s << '\n';
      }
    });
  return 0;
}

int cmd_gen(const Options& o, std::ostream& out) {
  SynthSpec spec = o.synth;
  spec.seed = o.seed;
  const SyntheticData synth = generate_synthetic(spec);
  emit(o.out, out, [&](std::ostream& s) { write_dataset(s, synth.data); });
  if (!o.labels_out.empty())
    emit(o.labels_out, out, [&](std::ostream& s) { write_labels(s, synth.labels); });
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto truth = read_labels_file(o.truth);
  const auto pred = read_labels_file(o.pred);
  const auto table = ContingencyTable::from_labels(truth, pred);
  if (o.metric == "ami" || o.metric == "all") out << "ami=" << real(ami(table)) << '\n';
  if (o.metric == "ari" || o.metric == "all") out << "ari=" << real(ari(table)) << '\n';
  if (o.metric == "hc" || o.metric == "all") {
    const auto [h, c] = homogeneity_completeness(table);
    out << "homogeneity=" << real(h) << "\ncompleteness=" << real(c) << '\n';
  }
  return 0;
}

int cmd_profile(const CLI::App& app, const Options& o, std::ostream& out) {
  check_solver_flags(app, o.solver);
  const auto tables = load_tables(o.tables);
  const auto data = read_dataset_file(o.input, tables);
  const ProfileResult result = profile_run(data, cluster_params(o), o.eta, o.t_total);
  emit(o.out, out, [&](std::ostream& s) { s << profile_csv(result.log); });
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--table", o.tables, "Symbolic cost table as id=path (or path; id = file stem)");
  sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* sub, Options& o, const std::vector<std::string>& solvers) {
  sub->add_option("--solver", o.solver, "Centroid solver")->check(CLI::IsMember(solvers));
  sub->add_option("--m", o.m, "Centroid support size (default: average member size)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--rho0", o.rho0, "Penalty scale for badmm/admm")->check(CLI::PositiveNumber);
  sub->add_option("--tau", o.tau, "Support relocation period")->check(CLI::PositiveNumber);
  sub->add_option("--iters", o.iters, "Iterations of the chosen solver")->check(CLI::PositiveNumber);
  sub->add_option("--rule", o.rule, "Consensus rule for badmm")->check(CLI::IsMember({"r1", "r2"}));
  sub->add_option("--t-admm", o.t_admm, "ADMM sweeps per support update")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", o.alpha, "Subgradient step length")->check(CLI::PositiveNumber);
  sub->add_option("--zeta", o.zeta, "Subgradient step cap")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "Random seed");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Clustering of discrete distributions under the Wasserstein distance", "d2c"};
  app.require_subcommand(1);

  auto* distance = app.add_subcommand("distance", "Pairwise W2 matrix as CSV");
  distance->add_option("a", o.input, "D2S file")->required();
  distance->add_option("b", o.input_b, "Second D2S file (default: a)");
  distance->add_option("--out", o.out, "Output CSV (default: stdout)");
  add_common(distance, o);

  auto* bary = app.add_subcommand("barycenter", "Wasserstein barycenter of a D2S file");
  bary->add_option("input", o.input, "D2S file")->required();
  add_solver_flags(bary, o, {"badmm", "admm", "subgrad", "ibp", "fulllp"});
  bary->add_option("--eps0", o.eps0, "IBP regularization relative to the mean cost")
      ->check(CLI::PositiveNumber);
  bary->add_option("--ibp-variant", o.ibp_variant, "IBP support handling")
      ->check(CLI::IsMember({"fixed", "v1", "v2"}));
  bary->add_option("--out", o.out, "Centroid D2S output (default: stdout)");
  bary->add_option("--residuals", o.residuals, "Residual CSV output (badmm)");
  add_common(bary, o);

  auto* cluster = app.add_subcommand("cluster", "D2-clustering");
  cluster->add_option("input", o.input, "D2S file")->required();
  cluster->add_option("--k", o.k, "Number of clusters")->check(CLI::PositiveNumber);
  add_solver_flags(cluster, o, {"badmm", "admm", "subgrad"});
  cluster->add_option("--max-outer", o.max_outer, "Maximum outer rounds")
      ->check(CLI::NonNegativeNumber);
  cluster->add_flag("--no-prune", o.no_prune, "Disable triangle-inequality pruning");
  cluster->add_option("--seeding", o.seeding, "Initial centroids")
      ->check(CLI::IsMember({"plusplus", "uniform"}));
  cluster->add_option("--labels", o.labels_out, "Labels output (default: stdout)");
  cluster->add_option("--centroids", o.centroids_out, "Centroid D2S output");
  cluster->add_option("--trace", o.trace_out, "Objective trace CSV output");
  cluster->add_flag("--trace-time", o.trace_time, "Add wall-clock seconds to the trace");
  add_common(cluster, o);

  auto* gen = app.add_subcommand("gen", "Synthetic planted-cluster dataset");
  gen->add_option("--n", o.synth.n, "Number of distributions")->check(CLI::PositiveNumber);
  gen->add_option("--d", o.synth.d, "Dimension")->check(CLI::PositiveNumber);
  gen->add_option("--m", o.synth.m, "Support size")->check(CLI::PositiveNumber);
  gen->add_option("--clusters", o.synth.clusters, "Planted groups")->check(CLI::PositiveNumber);
  gen->add_option("--sep", o.synth.separation, "Group separation")->check(CLI::NonNegativeNumber);
  gen->add_option("--alpha", o.synth.dirichlet_alpha, "Dirichlet concentration")
      ->check(CLI::PositiveNumber);
  gen->add_option("--dof", o.synth.t_dof, "Student-t degrees of freedom")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--out", o.out, "D2S output (default: stdout)");
  gen->add_option("--labels", o.labels_out, "Planted labels output");

  auto* eval = app.add_subcommand("eval", "Compare two label files");
  eval->add_option("--truth", o.truth, "Reference labels")->required();
  eval->add_option("--pred", o.pred, "Predicted labels")->required();
  eval->add_option("--metric", o.metric, "Metric")->check(CLI::IsMember({"ami", "ari", "hc", "all"}));

  auto* profile = app.add_subcommand("profile", "Time-budgeted clustering profile");
  profile->add_option("input", o.input, "D2S file")->required();
  profile->add_option("--k", o.k, "Number of clusters")->check(CLI::PositiveNumber);
  add_solver_flags(profile, o, {"badmm", "admm", "subgrad"});
  profile->add_option("--eta", o.eta, "Update budget relative to assignment time")
      ->check(CLI::PositiveNumber);
  profile->add_option("--t-total", o.t_total, "Total seconds")->check(CLI::PositiveNumber);
  profile->add_option("--seeding", o.seeding, "Initial centroids")
      ->check(CLI::IsMember({"plusplus", "uniform"}));
  profile->add_option("--out", o.out, "Profile CSV output (default: stdout)");
  add_common(profile, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (msg.empty()) msg = e.get_name();
    report(err, "usage_error", msg);
    return 2;
  }

  try {
    if (*distance) return cmd_distance(o, out);
    if (*bary) return cmd_barycenter(*bary, o, out);
    if (*cluster) return cmd_cluster(*cluster, o, out);
    if (*gen) return cmd_gen(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*profile) return cmd_profile(*profile, o, out);
  } catch (const UsageError& e) {
    report(err, "usage_error", e.what());
    return 2;
  } catch (const InputError& e) {
    report(err, "input_error", e.what());
    return 2;
  } catch (const NumericOverflow& e) {
    report(err, e.kind(), e.what(), e.iteration());
    return 3;
  } catch (const SolverError& e) {
    report(err, e.kind(), e.what());
    return 3;
  }
  return 2;
}

}  // namespace d2::cli
