#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ultra/core.hpp"
#include "ultra/experiment.hpp"
#include "ultra/generate.hpp"
#include "ultra/io.hpp"
#include "ultra/metric.hpp"
#include "ultra/theory.hpp"
#include "ultra/ultrametry.hpp"

namespace ultra::cli {
namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error("usage", m) {}
};

struct Options {
  std::string model = "independent";
  std::string branching, sigmas, n, m, k, lambda, sigma, seed;
  std::string in, out, manifest;
  std::string alpha = "2";
  double tol = 1e-9;
  bool symmetrize = false;
  std::string subdominant;
  bool labels = false;
  std::string n_list, k_list, epsilon, csv, convergence_csv;
  std::size_t realizations = 0;
};

struct Output {
  std::string path;  // "-" for stdout
  std::string content;
};

struct Invocation {
  std::string command;
  std::vector<std::string> recorded_args;
  json spec;
  std::optional<std::uint64_t> seed;
  json warnings = json::array();
  std::vector<Output> outputs;
  std::string manifest_path;
  bool emit_manifest = true;
  bool help = false;
  std::string help_text;
  int status = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::size_t parse_size(const std::string& s, const std::string& flag) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size())
    throw UsageError(flag + ": '" + s + "' is not a non-negative integer");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& flag) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size())
    throw UsageError(flag + ": '" + s + "' is not an unsigned 64-bit integer");
  return v;
}

double parse_real(const std::string& s, const std::string& flag) {
  try {
    return parse_double(s);
  } catch (const ParseError&) {
    throw UsageError(flag + ": '" + s + "' is not a number");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& flag) {
  std::vector<std::size_t> v;
  for (const auto& part : split(s, ',')) v.push_back(parse_size(part, flag));
  return v;
}

std::vector<double> parse_real_list(const std::string& s, const std::string& flag) {
  std::vector<double> v;
  for (const auto& part : split(s, ',')) v.push_back(parse_real(part, flag));
  return v;
}

double parse_alpha(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return kChebyshev;
  return parse_real(s, "--alpha");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("io", "cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error("io", "failed writing '" + path + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Which flags a subcommand received, for model/flag consistency checks.
struct Seen {
  const CLI::App* app;
  bool operator()(const std::string& name) const {
    const CLI::Option* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void reject(const Seen& seen, std::initializer_list<const char*> flags, const std::string& why) {
  for (const char* f : flags)
    if (seen(f)) throw UsageError(std::string(f) + " is not valid " + why);
}

void require(const Seen& seen, std::initializer_list<const char*> flags, const std::string& why) {
  for (const char* f : flags)
    if (!seen(f)) throw UsageError(std::string(f) + " is required " + why);
}

// Builds the generation family from the model flags. With `with_dimension`
// the dimension flags (--n or --k) are mandatory.
FamilySpec family_from(const Options& o, const Seen& seen, bool with_dimension,
                       bool allow_sigmas_for_hier = false) {
  if (o.model == "independent") {
    reject(seen, {"--m", "--k", "--lambda", "--sigma"}, "with --model independent");
    require(seen, {"--branching", "--sigmas"}, "with --model independent");
    if (with_dimension) require(seen, {"--n"}, "with --model independent");
    GenSpecIndependent s;
    s.branching = parse_size_list(o.branching, "--branching");
    s.sigmas = parse_real_list(o.sigmas, "--sigmas");
    s.dimension = with_dimension ? parse_size(o.n, "--n") : 1;
    return s;
  }
  if (o.model == "hierarchical") {
    reject(seen, {"--n"}, "with --model hierarchical (use --m and --k)");
    if (!allow_sigmas_for_hier) reject(seen, {"--sigmas"}, "with --model hierarchical (use --sigma)");
    require(seen, {"--branching", "--m", "--lambda", "--sigma"}, "with --model hierarchical");
    if (with_dimension) require(seen, {"--k"}, "with --model hierarchical");
    GenSpecHierarchical s;
    s.branching = parse_size_list(o.branching, "--branching");
    s.arity = parse_size(o.m, "--m");
    s.tree_depth = with_dimension ? parse_size(o.k, "--k") : 1;
    s.lambda = parse_real(o.lambda, "--lambda");
    s.sigma = parse_real(o.sigma, "--sigma");
    return s;
  }
  throw UsageError("--model must be 'independent' or 'hierarchical', got '" + o.model + "'");
}

void note_regime(const FamilySpec& spec, Invocation& inv) {
  if (const auto* h = std::get_if<GenSpecHierarchical>(&spec))
    if (validate_spec(*h).non_convergent_regime)
      inv.warnings.push_back("lambda <= 1: non-convergent regime, limit theorem conditions fail");
}

std::uint64_t resolve_seed(const Options& o, const Seen& seen, Invocation& inv) {
  std::uint64_t seed;
  if (seen("--seed")) {
    seed = parse_u64(o.seed, "--seed");
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    inv.recorded_args.push_back("--seed");
    inv.recorded_args.push_back(std::to_string(seed));
  }
  inv.seed = seed;
  return seed;
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "independent | hierarchical");
  sub->add_option("--branching", o.branching, "branching per level, e.g. 2,2,2");
  sub->add_option("--sigmas", o.sigmas, "step deviations per level (independent)");
  sub->add_option("--m", o.m, "coordinate tree arity (hierarchical)");
  sub->add_option("--lambda", o.lambda, "correlation parameter (hierarchical)");
  sub->add_option("--sigma", o.sigma, "xi deviation (hierarchical)");
}

void run_generate(const Options& o, const Seen& seen, Invocation& inv) {
  const FamilySpec spec = family_from(o, seen, true);
  std::visit([](const auto& s) { validate_spec(s); }, spec);
  note_regime(spec, inv);
  const std::uint64_t seed = resolve_seed(o, seen, inv);
  inv.spec = to_json(spec);
  const PointCloud cloud = generate(spec, Seed{seed, {}});
  std::ostringstream ss;
  write_cloud_csv(cloud, ss);
  inv.outputs.push_back({o.out, ss.str()});
}

void run_distances(const Options& o, const Seen& seen, Invocation& inv) {
  require(seen, {"--in"}, "for distances");
  const double alpha = parse_alpha(o.alpha);
  std::istringstream in(read_file(o.in));
  const PointCloud cloud = read_cloud_csv(in);
  inv.spec = {{"alpha", std::isinf(alpha) ? json("inf") : json(alpha)}, {"in", o.in}};
  const DistanceMatrix d = distance_matrix(cloud, alpha);
  std::ostringstream ss;
  write_matrix_csv(d.entries, ss);
  inv.outputs.push_back({o.out, ss.str()});
}

void run_analyze(const Options& o, const Seen& seen, Invocation& inv) {
  require(seen, {"--in"}, "for analyze");
  if (!(o.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
  std::istringstream in(read_file(o.in));
  MatrixCsv csv = read_matrix_csv(in);
  Matrix d = o.symmetrize ? symmetrized(csv.matrix) : csv.matrix;
  validate_distance_matrix(d, o.tol);

  json report = {{"points", d.rows()}, {"tolerance", o.tol}, {"symmetrized", o.symmetrize}};
  report["metric_axioms"] = to_json(check_metric_axioms(d, o.tol));
  if (d.rows() >= 3) {
    const UltrametricityReport u = analyze_ultrametricity(d, o.tol);
    report["U"] = u.degree;
    report["triangle_degree"] = {{"min", u.min_triangle_degree}, {"max", u.max_triangle_degree}};
    report["triples"] = u.triples;
    report["strong_triangle_violations"] = u.violating_triples;
    report["strong_triangle"] = to_json(u.strong);
  } else {
    report["U"] = nullptr;
    report["strong_triangle"] = to_json(is_ultrametric(d, o.tol));
  }
  if (!o.subdominant.empty()) {
    std::ostringstream ss;
    write_matrix_csv(subdominant_ultrametric(d), ss, csv.header);
    inv.outputs.push_back({o.subdominant, ss.str()});
    report["subdominant"] = o.subdominant;
  }
  inv.spec = {{"in", o.in}, {"tol", o.tol}, {"symmetrize", o.symmetrize}};
  inv.outputs.push_back({o.out, dump(report)});
}

void run_limit(const Options& o, const Seen& seen, Invocation& inv) {
  const bool hier = o.model == "hierarchical";
  const FamilySpec spec = family_from(o, seen, hier);
  std::visit([](const auto& s) { validate_spec(s); }, spec);
  note_regime(spec, inv);
  inv.spec = to_json(spec);
  const LimitMatrix lm = limit_matrix(branching_of(spec), limit_sigmas(spec));
  std::vector<std::string> header;
  if (o.labels)
    for (const auto& label : enumerate_multiindices(lm.branching)) header.push_back(format_label(label));
  std::ostringstream ss;
  write_matrix_csv(lm.entries, ss, header);
  inv.outputs.push_back({o.out, ss.str()});
}

void run_sweep(const Options& o, const Seen& seen, Invocation& inv) {
  const FamilySpec base = family_from(o, seen, false);
  if (seen("--n-list") == seen("--k-list")) throw UsageError("sweep needs exactly one of --n-list, --k-list");
  std::vector<std::size_t> ns;
  if (seen("--n-list")) {
    ns = parse_size_list(o.n_list, "--n-list");
  } else {
    if (o.model != "hierarchical") throw UsageError("--k-list requires --model hierarchical");
    const std::size_t m = std::get<GenSpecHierarchical>(base).arity;
    for (std::size_t k : parse_size_list(o.k_list, "--k-list")) {
      std::size_t n = 1;
      for (std::size_t i = 0; i < k; ++i) n *= m;
      ns.push_back(n);
    }
  }
  const std::size_t R = seen("--realizations") ? o.realizations : 10;
  const std::uint64_t seed = resolve_seed(o, seen, inv);
  note_regime(base, inv);
  inv.spec = to_json(base);
  inv.spec["n_values"] = ns;
  inv.spec["realizations"] = R;

  json result;
  const SweepResult sweep = sweep_ultrametricity(base, ns, R, seed);
  result["sweep"] = to_json(sweep);
  if (seen("--csv")) {
    std::ostringstream ss;
    write_sweep_csv(sweep, ss);
    inv.outputs.push_back({o.csv, ss.str()});
  }
  if (seen("--epsilon")) {
    double eps = 0.0;
    if (o.epsilon == "auto") {
      for (std::size_t n : ns) {
        try {
          const FamilySpec f = with_dimension(base, n);
          eps = default_epsilon(limit_matrix(branching_of(f), limit_sigmas(f)));
          break;
        } catch (const Error&) {
        }
      }
    } else {
      eps = parse_real(o.epsilon, "--epsilon");
    }
    const ConvergenceResult conv = convergence_probe(base, ns, eps, R, seed);
    result["convergence"] = to_json(conv);
    if (seen("--convergence-csv")) {
      std::ostringstream ss;
      write_convergence_csv(conv, ss);
      inv.outputs.push_back({o.convergence_csv, ss.str()});
    }
  }
  inv.outputs.push_back({o.out, dump(result)});
}

void run_moments(const Options& o, const Seen& seen, Invocation& inv) {
  reject(seen, {"--n", "--sigmas"}, "for moments");
  require(seen, {"--m", "--k", "--lambda", "--sigma"}, "for moments");
  GenSpecHierarchical s;
  s.branching = seen("--branching") ? parse_size_list(o.branching, "--branching")
                                    : std::vector<std::size_t>{1};
  s.arity = parse_size(o.m, "--m");
  s.tree_depth = parse_size(o.k, "--k");
  s.lambda = parse_real(o.lambda, "--lambda");
  s.sigma = parse_real(o.sigma, "--sigma");
  validate_spec(s);
  note_regime(s, inv);
  const std::size_t R = seen("--realizations") ? o.realizations : 10000;
  const std::uint64_t seed = resolve_seed(o, seen, inv);
  inv.spec = to_json(s);
  inv.spec["realizations"] = R;

  json result;
  result["spec"] = to_json(s);
  result["closed_form"] = to_json(moment_summary(s.tree_depth, s.lambda, s.sigma));
  result["markov_condition"] = {{"l1_1_l2_1", markov_condition_sum(s, 1, 1)},
                                {"l1_1_l2_2", markov_condition_sum(s, 1, 2)},
                                {"l1_2_l2_1", markov_condition_sum(s, 2, 1)},
                                {"l1_2_l2_2", markov_condition_sum(s, 2, 2)}};
  result["probe"] = to_json(moment_probe(s, R, seed));
  result["warnings"] = inv.warnings;
  inv.outputs.push_back({o.out, dump(result)});
}

Invocation execute(const std::vector<std::string>& args);
void commit(const Invocation& inv, std::ostream& out);

void run_replay(const Options& o, const Seen& seen, Invocation& inv) {
  require(seen, {"--manifest"}, "for replay");
  const json manifest = json::parse(read_file(o.manifest));
  const auto args = manifest.at("args").get<std::vector<std::string>>();
  Invocation replayed = execute(args);
  std::ostringstream discard;
  commit(replayed, discard);

  json rows = json::array();
  bool all = true;
  for (const auto& expected : manifest.at("outputs")) {
    const std::string path = expected.at("path");
    std::string actual = "missing";
    for (const auto& out : replayed.outputs)
      if (out.path == path) actual = hex64(fnv1a64(out.content));
    const bool match = actual == expected.at("fnv1a64").get<std::string>();
    all = all && match;
    rows.push_back({{"path", path}, {"expected", expected.at("fnv1a64")}, {"actual", actual}, {"match", match}});
  }
  inv.emit_manifest = false;
  inv.outputs.push_back({"-", dump({{"command", manifest.at("command")}, {"reproduced", all}, {"outputs", rows}})});
  if (!all) inv.status = 1;
}

Invocation execute(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Hierarchical random point clouds and their ultrametric limits", "ultra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ULTRA_VERSION);

  auto* gen = app.add_subcommand("generate", "generate a point cloud (CSV)");
  add_model_flags(gen, o);
  gen->add_option("--n", o.n, "dimension (independent)");
  gen->add_option("--k", o.k, "coordinate tree depth, n = m^k (hierarchical)");

  auto* dist = app.add_subcommand("distances", "pairwise normalized Minkowski distances (CSV)");
  dist->add_option("--in", o.in, "point cloud CSV");
  dist->add_option("--alpha", o.alpha, "Minkowski exponent >= 1, or inf");

  auto* analyze = app.add_subcommand("analyze", "ultrametricity report for a distance matrix (JSON)");
  analyze->add_option("--in", o.in, "distance matrix CSV");
  analyze->add_option("--tol", o.tol, "tolerance relative to the largest entry");
  analyze->add_flag("--symmetrize", o.symmetrize, "average D and its transpose before checking");
  analyze->add_option("--subdominant", o.subdominant, "write the subdominant ultrametric CSV here");

  auto* limit = app.add_subcommand("limit", "limit ultrametric matrix (CSV)");
  add_model_flags(limit, o);
  limit->add_option("--k", o.k, "coordinate tree depth (hierarchical)");
  limit->add_flag("--labels", o.labels, "emit a header row of multi-index labels");

  auto* sweep = app.add_subcommand("sweep", "U versus n, optionally convergence to the limit (JSON/CSV)");
  add_model_flags(sweep, o);
  sweep->add_option("--n-list", o.n_list, "dimensions, e.g. 10,100,1000");
  sweep->add_option("--k-list", o.k_list, "tree depths (hierarchical), n = m^k");
  sweep->add_option("--realizations", o.realizations, "realizations per n (default 10)");
  sweep->add_option("--epsilon", o.epsilon, "run the convergence probe with this epsilon, or 'auto'");
  sweep->add_option("--csv", o.csv, "write the sweep table here");
  sweep->add_option("--convergence-csv", o.convergence_csv, "write the convergence table here");

  auto* moments = app.add_subcommand("moments", "Monte Carlo check of the coordinate field moments (JSON)");
  moments->add_option("--branching", o.branching, "outer branching (default 1)");
  moments->add_option("--m", o.m, "coordinate tree arity");
  moments->add_option("--k", o.k, "coordinate tree depth");
  moments->add_option("--lambda", o.lambda, "correlation parameter");
  moments->add_option("--sigma", o.sigma, "xi deviation");
  moments->add_option("--realizations", o.realizations, "field draws (default 10000)");
  moments->add_option("--n", o.n)->group("");
  moments->add_option("--sigmas", o.sigmas)->group("");

  auto* replay = app.add_subcommand("replay", "re-run a manifest and verify its outputs");
  replay->add_option("--manifest", o.manifest, "manifest JSON");

  for (auto* sub : {gen, sweep, moments}) sub->add_option("--seed", o.seed, "master seed (64-bit)");
  for (auto* sub : {gen, dist, analyze, limit, sweep, moments}) {
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_option("--manifest", o.manifest, "manifest path");
  }

  std::vector<const char*> argv{"ultra"};
  for (const auto& a : args) argv.push_back(a.c_str());

  Invocation inv;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    inv.help = true;
    inv.help_text = app.help();
    for (auto* sub : app.get_subcommands())
      inv.help_text = sub->help();
    return inv;
  } catch (const CLI::CallForVersion&) {
    inv.help = true;
    inv.help_text = std::string(ULTRA_VERSION) + "\n";
    return inv;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (o.out.empty()) o.out = "-";

  CLI::App* sub = app.get_subcommands().front();
  inv.command = sub->get_name();
  const Seen seen{sub};
  inv.recorded_args.push_back(inv.command);
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--manifest" && inv.command != "replay") {
      ++i;
      continue;
    }
    if (args[i].rfind("--manifest=", 0) == 0) continue;
    inv.recorded_args.push_back(args[i]);
  }
  if (inv.command == "generate") run_generate(o, seen, inv);
  else if (inv.command == "distances") run_distances(o, seen, inv);
  else if (inv.command == "analyze") run_analyze(o, seen, inv);
  else if (inv.command == "limit") run_limit(o, seen, inv);
  else if (inv.command == "sweep") run_sweep(o, seen, inv);
  else if (inv.command == "moments") run_moments(o, seen, inv);
  else if (inv.command == "replay") run_replay(o, seen, inv);

  if (inv.command != "replay") {
    if (seen("--manifest")) inv.manifest_path = o.manifest;
    else if (o.out != "-") inv.manifest_path = o.out + ".manifest.json";
    else inv.manifest_path = "ultra-" + inv.command + ".manifest.json";
  }
  return inv;
}

void commit(const Invocation& inv, std::ostream& out) {
  for (const auto& o : inv.outputs) {
    if (o.path == "-") out << o.content;
    else write_file(o.path, o.content);
  }
}

void write_manifest(const Invocation& inv) {
  json outputs = json::array();
  for (const auto& o : inv.outputs)
    outputs.push_back({{"path", o.path}, {"bytes", o.content.size()}, {"fnv1a64", hex64(fnv1a64(o.content))}});
  json m = {{"tool", "ultra"},
            {"version", ULTRA_VERSION},
            {"command", inv.command},
            {"args", inv.recorded_args},
            {"spec", inv.spec},
            {"warnings", inv.warnings},
            {"outputs", outputs}};
  m["seed"] = inv.seed ? json(*inv.seed) : json(nullptr);
  write_file(inv.manifest_path, dump(m));
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const Invocation inv = execute(args);
    if (inv.help) {
      out << inv.help_text;
      return 0;
    }
    commit(inv, out);
    if (inv.emit_manifest) write_manifest(inv);
    if (inv.status != 0) report_error(err, "replay", "replayed outputs differ from the manifest");
    return inv.status;
  } catch (const UsageError& e) {
    report_error(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    report_error(err, "json", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
}

}  // namespace ultra::cli
