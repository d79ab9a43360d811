#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpc/codec.hpp"
#include "cpc/combinatorics.hpp"
#include "cpc/design.hpp"
#include "cpc/evaluation.hpp"
#include "cpc/io.hpp"
#include "cpc/order_statistics.hpp"
#include "cpc/parallel.hpp"
#include "cpc/random.hpp"
#include "cpc/serialization.hpp"
#include "cpc/stream.hpp"
#include "cpc/wsc.hpp"

#ifndef CPC_VERSION
#define CPC_VERSION "0.0.0"
#endif

namespace cpc::cli {

namespace {

using nlohmann::json;

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

[[noreturn]] void fail(int code, const std::string& what) { throw Failure(code, what); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kUsage, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kFailure, "cannot write " + path);
  out << bytes;
  if (!out) fail(kFailure, "write failed: " + path);
}

ConcentricCode load_code(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(kUsage, path + ": " + e.what());
  }
  try {
    return code_from_json(doc);
  } catch (const std::exception& e) {
    fail(kUsage, path + ": " + e.what());
  }
}

std::pair<int, int> parse_range(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    fail(kUsage, flag + " expects a:b, got '" + text + "'");
  }
}

json versions() {
  return {{"cpc", CPC_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"rng", std::string(kRngAlgorithm)}};
}

struct Run {
  std::string command;
  std::vector<std::string> args;
  json parameters = json::object();
  std::vector<std::string> outputs;
  std::string manifest_path;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write_manifest() const {
    if (manifest_path.empty()) return;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = {{"command", command},  {"args", args},         {"parameters", parameters}, {"seed", seed},
              {"versions", versions()}, {"outputs", outputs}, {"wall_time_s", wall}};
    write_file(manifest_path, m.dump(2) + "\n");
  }
};

// ---- design ---------------------------------------------------------------

struct DesignArgs {
  int n = 0;
  int J = 1;
  int variant = 1;
  std::string mode = "common";
  double rate = 0.0;
  bool rate_given = false;
  std::vector<std::string> compositions;
  std::size_t samples = 500'000;
  std::size_t eval_samples = 0;
  std::uint64_t seed = 1;
  bool no_filter = false;
  std::string lattice = "scalar";
  double tol = 1e-6;
  int max_iters = 200;
  std::string out;
  std::string manifest;
};

json lloyd_json(const LloydReport& r) {
  json j = {{"iterations", r.iterations},
            {"converged", r.converged},
            {"final_D", r.distortion},
            {"stderr", r.std_error},
            {"distortion_history", r.distortion_history},
            {"probabilities", std::vector<double>(r.probabilities.data(), r.probabilities.data() + r.probabilities.size())},
            {"empty_cell_events", r.empty_cell_events},
            {"samples", r.samples},
            {"training_seed", r.seed},
            {"notes", r.notes}};
  if (r.max_decomposition_residual > 0) j["max_decomposition_residual"] = r.max_decomposition_residual;
  if (r.single_pc_distortion) j["single_pc_exact_D"] = *r.single_pc_distortion;
  return j;
}

int cmd_design(const DesignArgs& a, int threads, Run& run, std::ostream& out) {
  const bool wsc = a.mode == "wsc-var" || a.mode == "wsc-fixed";
  if (a.mode != "common" && a.mode != "general" && !wsc) fail(kUsage, "--mode must be common, general, wsc-var or wsc-fixed");
  if (wsc && !a.rate_given) fail(kUsage, "--rate is required for --mode " + a.mode);
  if (a.J < 1) fail(kUsage, "--J must be >= 1");

  std::vector<Composition> comps;
  try {
    for (const auto& s : a.compositions) comps.push_back(Composition::parse(s));
  } catch (const std::exception& e) {
    fail(kUsage, std::string("--composition: ") + e.what());
  }
  int n = a.n;
  if (n == 0 && !comps.empty()) n = comps.front().dimension();
  if (n < 1) fail(kUsage, "--n is required (or give --composition)");
  for (const auto& c : comps)
    if (c.dimension() != n) fail(kUsage, "composition (" + c.to_string() + ") does not sum to n=" + std::to_string(n));

  DesignConfig cfg;
  Variant variant;
  try {
    variant = variant_from_int(a.variant);
  } catch (const std::exception& e) {
    fail(kUsage, e.what());
  }
  cfg.J = a.J;
  cfg.variant = variant;
  cfg.sample_count = a.samples;
  cfg.seed = a.seed;
  cfg.lloyd_rel_tol = a.tol;
  cfg.lloyd_max_iters = a.max_iters;
  cfg.threads = threads;
  try {
    validate(cfg);
  } catch (const std::exception& e) {
    fail(kUsage, e.what());
  }

  run.seed = a.seed;
  run.parameters = {{"n", n},
                    {"J", a.J},
                    {"variant", a.variant},
                    {"mode", a.mode},
                    {"compositions", a.compositions},
                    {"samples", a.samples},
                    {"eval_samples", a.eval_samples ? a.eval_samples : a.samples},
                    {"seed", a.seed},
                    {"conjecture_filter", !a.no_filter},
                    {"lattice", a.lattice},
                    {"lloyd_rel_tol", a.tol},
                    {"lloyd_max_iters", a.max_iters}};
  if (a.rate_given) run.parameters["rate"] = a.rate;

  json doc;
  try {
    const auto table = cached_order_stats(n);
    if (a.mode == "common") {
      if (comps.size() != 1) fail(kUsage, "--mode common needs exactly one --composition");
      if (a.J == 1) {
        // The single-sphere optimum is known exactly; no training needed.
        const auto cw = optimal_levels_single(comps.front(), *table, variant);
        doc = to_json(ConcentricCode(variant, {cw}));
        doc["design"] = {{"mode", "common"}, {"method", "exact"}, {"exact_D", pc_distortion_exact(cw, *table)}};
      } else {
        auto r = design_common_composition(comps.front(), cfg, *table);
        doc = to_json(r.code);
        doc["design"] = {{"mode", "common"}, {"method", "reduced-lloyd"}, {"lloyd", lloyd_json(r.report)}};
      }
    } else if (a.mode == "general") {
      if (comps.size() == 1) comps.assign(static_cast<std::size_t>(a.J), comps.front());
      if (comps.size() != static_cast<std::size_t>(a.J))
        fail(kUsage, "--mode general needs one --composition or exactly J of them");
      auto r = lloyd_general(comps, cfg, *table);
      doc = to_json(r.code);
      doc["design"] = {{"mode", "general"}, {"method", "lloyd"}, {"lloyd", lloyd_json(r.report)}};
    } else {
      WscOptions opt;
      try {
        opt.G = lattice_G(a.lattice);
      } catch (const std::exception& e) {
        fail(kUsage, std::string("--lattice: ") + e.what());
      }
      opt.filter = a.no_filter ? CompositionFilter::none
                   : variant == Variant::II ? CompositionFilter::variant2_monotone
                                            : CompositionFilter::variant1_unimodal;
      opt.design = cfg;
      opt.eval_samples = a.eval_samples ? a.eval_samples : a.samples;
      const auto mode = a.mode == "wsc-var" ? WscMode::variable_rate : WscMode::fixed_rate;
      auto r = design_wsc(mode, n, a.rate, opt, *table);
      doc = to_json(r.code);
      doc["design"] = to_json(r.report);
      doc["design"]["mode"] = a.mode;
      doc["design"]["filter"] = to_string(opt.filter);
      doc["design"]["training"] = lloyd_json(r.report.lloyd);
    }
  } catch (const Failure&) {
    throw;
  } catch (const ResourceLimitError& e) {
    fail(kResourceLimit, e.what());
  } catch (const std::exception& e) {
    fail(kDesignInfeasible, std::string("design infeasible: ") + e.what());
  }
  doc["design"]["seed"] = a.seed;
  doc["design"]["samples"] = a.samples;
  doc["design"]["rng"] = std::string(kRngAlgorithm);
  write_file(a.out, doc.dump(2) + "\n");
  run.outputs.push_back(a.out);
  out << "wrote " << a.out << " (" << doc["subcodes"].size() << " subcodes)\n";
  return kOk;
}

// ---- encode / decode ------------------------------------------------------

struct CodingArgs {
  std::string codebook;
  std::string input;
  std::string output;
  std::string codewords;
  std::string manifest;
};

std::string csv_row(const Eigen::VectorXd& v) {
  std::string line;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) line += ',';
    line += format_real(v(i));
  }
  return line + '\n';
}

int cmd_encode(const CodingArgs& a, Run& run, std::ostream& out) {
  const auto code = load_code(a.codebook);
  std::vector<RealRow> rows;
  {
    std::ifstream in(a.input, std::ios::binary);
    if (!in) fail(kUsage, "cannot open " + a.input);
    try {
      rows = read_real_rows(in);
    } catch (const std::exception& e) {
      fail(kUsage, a.input + ": " + e.what());
    }
  }
  for (const auto& r : rows)
    if (r.values.size() != static_cast<std::size_t>(code.dimension()))
      fail(kDimensionMismatch, a.input + ": row " + std::to_string(r.line) + " has " + std::to_string(r.values.size()) +
                                   " values, codebook dimension is " + std::to_string(code.dimension()));
  std::ostringstream stream(std::ios::binary);
  std::string chosen;
  if (!rows.empty()) write_stream_header(stream, code);
  for (const auto& r : rows) {
    const Eigen::Map<const Eigen::VectorXd> x(r.values.data(), code.dimension());
    const auto enc = encode_cpc(x, code);
    write_record(stream, enc.index, code);
    if (!a.codewords.empty()) chosen += csv_row(enc.codeword);
  }
  write_file(a.output, stream.str());
  run.outputs.push_back(a.output);
  if (!a.codewords.empty()) {
    write_file(a.codewords, chosen);
    run.outputs.push_back(a.codewords);
  }
  out << "encoded " << rows.size() << " vectors\n";
  return kOk;
}

int cmd_decode(const CodingArgs& a, Run& run, std::ostream& out) {
  const auto code = load_code(a.codebook);
  std::vector<EncodedIndex> records;
  {
    std::istringstream in(read_file(a.input), std::ios::binary);
    try {
      records = read_stream(in, code);
    } catch (const StreamError& e) {
      fail(kCorruptStream, a.input + ": " + e.what());
    }
  }
  std::string text;
  for (const auto& r : records) text += csv_row(decode(r, code));
  write_file(a.output, text);
  run.outputs.push_back(a.output);
  out << "decoded " << records.size() << " vectors\n";
  return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> codebooks;
  std::size_t samples = 500'000;
  std::uint64_t seed = 1;
  std::vector<std::string> baselines;
  std::string rate_mode = "both";
  bool pareto = false;
  std::string output;
  std::string manifest;
};

int cmd_eval(const EvalArgs& a, int threads, Run& run, std::ostream& out) {
  if (a.rate_mode != "fixed" && a.rate_mode != "variable" && a.rate_mode != "both")
    fail(kUsage, "--rate-mode must be fixed, variable or both");
  for (const auto& b : a.baselines)
    if (b != "ecsq" && b != "ecusq" && b != "bound") fail(kUsage, "unknown baseline '" + b + "'");
  if (a.codebooks.empty() && a.baselines.empty()) fail(kUsage, "nothing to evaluate: give --codebook or --baselines");
  if (!a.codebooks.empty() && a.samples < 1000) fail(kUsage, "--samples must be >= 1000");
  run.seed = a.seed;
  run.parameters = {{"codebooks", a.codebooks}, {"samples", a.samples},     {"seed", a.seed},
                    {"baselines", a.baselines}, {"rate_mode", a.rate_mode}, {"pareto", a.pareto}};

  std::vector<RDPoint> points;
  for (std::size_t i = 0; i < a.codebooks.size(); ++i) {
    const auto code = load_code(a.codebooks[i]);
    const auto eval_seed = derive_seed(a.seed, "eval/" + std::to_string(i));
    const auto r = empirical_distortion(code, a.samples, eval_seed, 1.0, threads);
    RDPoint p;
    p.n = code.dimension();
    p.J = static_cast<int>(code.size());
    p.distortion = r.distortion;
    p.std_error = r.std_error;
    p.seed = eval_seed;
    p.samples = r.samples;
    if (a.rate_mode != "variable") {
      p.method = "cpc-fixed";
      p.rate = rate_fixed(code);
      points.push_back(p);
    }
    if (a.rate_mode != "fixed") {
      p.method = "cpc-variable";
      p.rate = rate_variable(code, r.probabilities);
      points.push_back(p);
    }
    if (r.sparse_cells) out << a.codebooks[i] << ": some spheres won fewer than 10 samples\n";
  }
  for (const auto& b : a.baselines) {
    std::vector<RDPoint> curve;
    if (b == "ecsq") curve = ecsq_curve(default_step_grid());
    if (b == "ecusq") curve = ecusq_curve(default_step_grid());
    if (b == "bound") {
      std::vector<double> rates;
      for (int i = 0; i <= 80; ++i) rates.push_back(0.05 * i);
      curve = shannon_bound(rates);
    }
    points.insert(points.end(), curve.begin(), curve.end());
  }
  if (a.pareto) {
    std::vector<RDPoint> filtered;
    std::vector<std::string> methods;
    for (const auto& p : points)
      if (std::find(methods.begin(), methods.end(), p.method) == methods.end()) methods.push_back(p.method);
    for (const auto& m : methods) {
      std::vector<RDPoint> group;
      std::copy_if(points.begin(), points.end(), std::back_inserter(group), [&](const RDPoint& p) { return p.method == m; });
      auto front = pareto_filter(std::move(group));
      filtered.insert(filtered.end(), front.begin(), front.end());
    }
    points = std::move(filtered);
  }
  std::ostringstream csv;
  write_rd_csv(csv, points);
  if (a.output.empty()) {
    out << csv.str();
  } else {
    write_file(a.output, csv.str());
    run.outputs.push_back(a.output);
  }
  return kOk;
}

// ---- ratepoints -----------------------------------------------------------

struct RatePointArgs {
  std::string n_range = "2:9";
  std::string J_range = "1:4";
  std::uint64_t limit = 200'000'000;
  std::string output;
  std::string manifest;
};

int cmd_ratepoints(const RatePointArgs& a, int threads, Run& run, std::ostream& out) {
  const auto [n0, n1] = parse_range(a.n_range, "--n-range");
  const auto [J0, J1] = parse_range(a.J_range, "--J-range");
  if (n0 < 1 || n1 < n0 || J0 < 1 || J1 < J0) fail(kUsage, "ranges must be nonempty and start at >= 1");
  run.parameters = {{"n_range", a.n_range}, {"J_range", a.J_range}, {"limit", a.limit}};
  std::ostringstream csv;
  csv << "n,J,count\n";
  try {
    for (int n = n0; n <= n1; ++n)
      for (int J = J0; J <= J1; ++J) csv << n << ',' << J << ',' << rate_point_census(n, J, a.limit, threads).count() << '\n';
  } catch (const ResourceLimitError& e) {
    fail(kResourceLimit, e.what());
  }
  if (a.output.empty()) {
    out << csv.str();
  } else {
    write_file(a.output, csv.str());
    run.outputs.push_back(a.output);
  }
  return kOk;
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err, int depth) {
  json m;
  try {
    m = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(kUsage, path + ": " + e.what());
  }
  if (!m.contains("args") || !m["args"].is_array()) fail(kUsage, path + ": manifest has no args");
  if (depth > 0) fail(kUsage, "replay manifests cannot nest");
  return run_impl(m["args"].get<std::vector<std::string>>(), out, err, depth + 1);
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Permutation and concentric permutation source codes for Gaussian sources", "cpc"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: CPC_THREADS or 1)");

  DesignArgs d;
  auto* design = app.add_subcommand("design", "design a codebook");
  design->add_option("--n", d.n, "dimension");
  design->add_option("--J", d.J, "number of spheres")->capture_default_str();
  design->add_option("--variant", d.variant, "1 or 2")->capture_default_str();
  design->add_option("--mode", d.mode, "common | general | wsc-var | wsc-fixed")->capture_default_str();
  auto* rate_opt = design->add_option("--rate", d.rate, "target rate in bits/sample (wsc modes)");
  design->add_option("--composition", d.compositions, "composition such as 3,2,2 (repeatable)")
      ->allow_extra_args(false)
      ->take_all();
  design->add_option("--samples", d.samples, "training samples")->capture_default_str();
  design->add_option("--eval-samples", d.eval_samples, "evaluation samples (default: --samples)");
  design->add_option("--seed", d.seed, "random seed")->capture_default_str();
  design->add_flag("--no-conjecture-filter", d.no_filter, "search all compositions in wsc modes");
  design->add_option("--lattice", d.lattice, "G of the shape lattice: scalar, leech or a number")->capture_default_str();
  design->add_option("--tol", d.tol, "Lloyd relative improvement threshold")->capture_default_str();
  design->add_option("--max-iters", d.max_iters, "Lloyd iteration cap")->capture_default_str();
  design->add_option("--out", d.out, "codebook JSON path")->required();
  design->add_option("--manifest", d.manifest, "manifest path (default: <out>.manifest.json)");

  CodingArgs enc_args, dec_args;
  auto* encode = app.add_subcommand("encode", "encode CSV vectors to a bitstream");
  encode->add_option("--codebook", enc_args.codebook)->required();
  encode->add_option("--input", enc_args.input, "CSV, one vector per row")->required();
  encode->add_option("--output", enc_args.output, "bitstream path")->required();
  encode->add_option("--codewords", enc_args.codewords, "optional CSV of chosen codewords");
  encode->add_option("--manifest", enc_args.manifest);
  auto* decode = app.add_subcommand("decode", "decode a bitstream to CSV");
  decode->add_option("--codebook", dec_args.codebook)->required();
  decode->add_option("--input", dec_args.input, "bitstream path")->required();
  decode->add_option("--output", dec_args.output, "CSV path")->required();
  decode->add_option("--manifest", dec_args.manifest);

  EvalArgs e;
  auto* eval = app.add_subcommand("eval", "Monte Carlo rate-distortion points");
  eval->add_option("--codebook", e.codebooks, "codebook JSON (repeatable)")->take_all();
  eval->add_option("--samples", e.samples)->capture_default_str();
  eval->add_option("--seed", e.seed)->capture_default_str();
  eval->add_option("--baselines", e.baselines, "ecsq,ecusq,bound")->delimiter(',');
  eval->add_option("--rate-mode", e.rate_mode, "fixed | variable | both")->capture_default_str();
  eval->add_flag("--pareto", e.pareto, "keep only the lower envelope per method");
  eval->add_option("--output", e.output, "CSV path (default: stdout)");
  eval->add_option("--manifest", e.manifest);

  RatePointArgs rp;
  auto* ratepoints = app.add_subcommand("ratepoints", "count fixed-rate CPC rate points");
  ratepoints->add_option("--n-range", rp.n_range)->capture_default_str();
  ratepoints->add_option("--J-range", rp.J_range)->capture_default_str();
  ratepoints->add_option("--limit", rp.limit, "largest multiset space to enumerate")->capture_default_str();
  ratepoints->add_option("--output", rp.output, "CSV path (default: stdout)");
  ratepoints->add_option("--manifest", rp.manifest);

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_path)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n\n"
        << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsage;
  }
  d.rate_given = rate_opt->count() > 0;
  if (threads < 0) {
    err << "error: --threads must be >= 0\n";
    return kUsage;
  }
  threads = resolve_threads(threads);

  Run run;
  run.args = args;
  try {
    if (*design) {
      run.command = "design";
      run.manifest_path = d.manifest.empty() ? d.out + ".manifest.json" : d.manifest;
      const int rc = cmd_design(d, threads, run, out);
      run.write_manifest();
      return rc;
    }
    if (*encode || *decode) {
      const bool is_encode = static_cast<bool>(*encode);
      const auto& c = is_encode ? enc_args : dec_args;
      run.command = is_encode ? "encode" : "decode";
      run.parameters = {{"codebook", c.codebook}, {"input", c.input}};
      run.manifest_path = c.manifest;
      const int rc = is_encode ? cmd_encode(c, run, out) : cmd_decode(c, run, out);
      run.write_manifest();
      return rc;
    }
    if (*eval) {
      run.command = "eval";
      run.manifest_path = e.manifest.empty() && !e.output.empty() ? e.output + ".manifest.json" : e.manifest;
      const int rc = cmd_eval(e, threads, run, out);
      run.write_manifest();
      return rc;
    }
    if (*ratepoints) {
      run.command = "ratepoints";
      run.manifest_path = rp.manifest;
      const int rc = cmd_ratepoints(rp, threads, run, out);
      run.write_manifest();
      return rc;
    }
    if (*replay) return cmd_replay(replay_path, out, err, depth);
  } catch (const Failure& f) {
    err << "error: " << f.what() << "\n";
    if (f.code == kUsage && *design && !d.rate_given && d.mode.rfind("wsc", 0) == 0) err << design->help();
    return f.code;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_impl(args, out, err, 0);
}

}  // namespace cpc::cli
