// evenproj-lab: runs verification suites and single computations, prints JSON or CSV.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "evenproj/suites.hpp"

using namespace evenproj;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2 };

struct Globals {
  std::string format = "json";
  std::string out;
  std::vector<int> n_levels{24, 32, 48};
  std::uint64_t seed = SuiteOptions{}.seed;
};

void write_output(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Parse, g.out + ": cannot write");
  f << text;
}

void emit(const Globals& g, const Json& j) { write_output(g, g.format == "csv" ? emit_csv(j) : to_compact(j) + "\n"); }

Json error_json(const Error& e) { return {{"error", to_string(e.kind())}, {"message", e.what()}}; }

// Numerical aborts in single commands are reported as JSON with exit 1;
// parse errors exit 2.
template <class F>
int guarded(const Globals& g, F body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) {
      std::cerr << "evenproj-lab: " << e.what() << "\n";
      return kUsage;
    }
    emit(g, error_json(e));
    return kFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for even pseudodifferential projections"};
  app.require_subcommand(1);
  Globals g;
  std::string levels_text;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", g.out, "Write output to this path");
  app.add_option("--n-levels", levels_text, "Truncation levels, comma separated (default 24,32,48)");
  app.add_option("--seed", g.seed, "Seed for randomized corpora");

  auto* suite = app.add_subcommand("suite", "Run a named verification suite");
  std::string suite_name;
  std::vector<std::string> fixtures;
  suite->add_option("name", suite_name, "Suite: all, eta, prop3, prop4, reductions, sf, theorem2, theorem5")->required();
  suite->add_option("--fixtures", fixtures, "Fixture files, or 'builtin'");

  auto* index = app.add_subcommand("index", "Index formula on one triple");
  std::string triple_file;
  index->add_option("--triple", triple_file, "Triple JSON")->required();

  auto* ddim = app.add_subcommand("d-dim", "d-dimension of a projection");
  std::string projection_file;
  long chi = 0;
  ddim->add_option("--projection", projection_file, "Projection JSON")->required();
  ddim->add_option("--chi", chi, "Normalization r");

  auto* eta = app.add_subcommand("eta", "Eta invariant of a Fourier-diagonal model");
  std::string model_file;
  eta->add_option("--model", model_file, "Model JSON")->required();

  auto* sf = app.add_subcommand("sf", "Spectral flow of a diagonal family");
  std::string family_file;
  int samples = 64;
  sf->add_option("--family", family_file, "Family JSON")->required();
  sf->add_option("--samples", samples, "Sample count")->check(CLI::Range(2, 100000));

  auto* bvp = app.add_subcommand("bvp", "Boundary value problems on the cylinder");
  bvp->require_subcommand(1);
  std::string problem_file, trace_file;
  auto* bvp_index = bvp->add_subcommand("index", "Index of a problem");
  bvp_index->add_option("--problem", problem_file, "Problem JSON")->required();
  auto* bvp_reduce = bvp->add_subcommand("reduce", "Reduce to a spectral problem");
  bvp_reduce->add_option("--problem", problem_file, "Problem JSON")->required();
  bvp_reduce->add_option("--emit-trace", trace_file, "Write homotopy traces here");
  auto* bvp_thm5 = bvp->add_subcommand("verify-thm5", "Index formula for a spectral problem");
  bvp_thm5->add_option("--problem", problem_file, "Problem JSON")->required();

  auto* symbol = app.add_subcommand("symbol", "Symbol utilities");
  symbol->require_subcommand(1);
  auto* validate = symbol->add_subcommand("validate", "Ellipticity and admissibility of a symbol");
  std::string symbol_file;
  validate->add_option("file", symbol_file, "Symbol JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  if (!levels_text.empty()) {
    try {
      g.n_levels.clear();
      for (const auto& s : CLI::detail::split(levels_text, ',')) g.n_levels.push_back(std::stoi(s));
    } catch (const std::exception&) {
      std::cerr << "evenproj-lab: --n-levels expects integers such as 24,32,48\n";
      return kUsage;
    }
    if (g.n_levels.empty() || !std::is_sorted(g.n_levels.begin(), g.n_levels.end()) ||
        std::adjacent_find(g.n_levels.begin(), g.n_levels.end()) != g.n_levels.end() || g.n_levels.front() < 1) {
      std::cerr << "evenproj-lab: --n-levels must be nonempty, positive and strictly ascending\n";
      return kUsage;
    }
  }

  if (suite->parsed()) {
    if (suite_name != "all" && std::find(suite_names().begin(), suite_names().end(), suite_name) == suite_names().end()) {
      std::cerr << "evenproj-lab: unknown suite '" << suite_name << "'\n";
      return kUsage;
    }
    SuiteOptions opt;
    opt.n_levels = g.n_levels;
    opt.seed = g.seed;
    if (!(fixtures.size() == 1 && fixtures.front() == "builtin")) opt.fixtures = fixtures;
    const auto start = std::chrono::steady_clock::now();
    Report r;
    try {
      r = run_suite(suite_name, opt);
    } catch (const Error& e) {
      std::cerr << "evenproj-lab: " << e.what() << "\n";
      return kUsage;
    }
    write_output(g, g.format == "csv" ? emit_csv(r) : emit_json(r));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "suite " << suite_name << ": " << r.passed() << " pass, " << r.failed() << " fail, " << secs << " s\n";
    return r.failed() == 0 ? kPass : kFail;
  }

  if (index->parsed()) {
    return guarded(g, [&] {
      const TripleSpec t = io::parse_triple(io::read_file(triple_file), triple_file + "#");
      const Theorem2Report r = verify_theorem2(t, g.n_levels);
      emit(g, theorem2_json(r));
      return r.holds ? kPass : kFail;
    });
  }

  if (ddim->parsed()) {
    return guarded(g, [&] {
      const ProjectionOperator p = io::parse_projection(io::read_file(projection_file), projection_file + "#");
      const Rational d = d_dimension(p, Normalization{Rational(chi)});
      emit(g, {{"d", d.str()}, {"chi", chi}, {"N", p.N()}, {"fiber", p.fiber()}, {"even", p.even}});
      return kPass;
    });
  }

  if (eta->parsed()) {
    return guarded(g, [&] {
      const EigenModel m = io::parse_model(io::read_file(model_file), model_file + "#");
      emit(g, eta_json(eta_invariant(m)));
      return kPass;
    });
  }

  if (sf->parsed()) {
    return guarded(g, [&] {
      const DiagonalFamily f = io::parse_family(io::read_file(family_file), family_file + "#");
      const SpectralFlowReport r = spectral_flow(f, samples);
      emit(g, sf_json(r));
      return r.agree ? kPass : kFail;
    });
  }

  if (bvp->parsed()) {
    return guarded(g, [&] {
      const io::ProblemSpec p = io::parse_problem(io::read_file(problem_file), problem_file + "#");
      if (bvp_index->parsed()) {
        if (p.dt5) {
          emit(g, bvp_json(spectral_bvp_index(cylinder_from_problem(p))));
          return kPass;
        }
        const BoundaryData bd = p.boundary();
        const LopatinskiiCertificate cert = check_lopatinskii(p.ns, bd);
        Json out = {{"lopatinskii", lopatinskii_json(cert)}};
        if (!cert.elliptic) {
          emit(g, out);
          return kFail;
        }
        const KerCoker kc = half_cylinder_index(p.ns, bd);
        out["index"] = kc.index();
        out["ker"] = kc.ker;
        out["coker"] = kc.coker;
        emit(g, out);
        return kPass;
      }
      if (bvp_reduce->parsed()) {
        if (p.dt5) throw Error(ErrorKind::InvalidArgument, "reduce needs a symbol-level problem");
        const ReductionChain ch = reduce_to_spectral(p.ns, p.boundary());
        Json traces = Json::array();
        for (const auto& t : ch.traces) traces.push_back(trace_json(t));
        if (!trace_file.empty()) {
          std::ofstream f(trace_file, std::ios::binary);
          if (!f) throw Error(ErrorKind::Parse, trace_file + ": cannot write");
          f << to_compact({{"problem", p.name}, {"traces", traces}}) << "\n";
        }
        emit(g, {{"input_index", ch.input_index},
                 {"reduced_index", ch.reduced_index},
                 {"normalized_index", ch.normalized_index},
                 {"endpoint_index", ch.endpoint_index},
                 {"identity_defect", ch.identity_defect},
                 {"certified", ch.certified},
                 {"equal", ch.equal}});
        return ch.equal && ch.certified ? kPass : kFail;
      }
      const Theorem5Report r = verify_theorem5(cylinder_from_problem(p));
      emit(g, {{"lhs", r.lhs},
               {"half_double", r.half_double.str()},
               {"d", r.d.str()},
               {"torus_levels", r.torus_levels},
               {"torus_values", r.torus_values},
               {"equal", r.equal}});
      return r.equal ? kPass : kFail;
    });
  }

  if (validate->parsed()) {
    return guarded(g, [&] {
      const MatrixSymbol s = io::parse_symbol(io::read_file(symbol_file), symbol_file + "#");
      Json out = {{"n", s.n()}, {"order", s.order}, {"support", s.support()}, {"even", s.is_even()}};
      if (s.order == 0) {
        const EllipticityReport e = validate_elliptic(s);
        out["elliptic"] = e.elliptic;
        out["min_abs_det"] = e.min_abs_det;
        if (e.elliptic) {
          out["winding_plus"] = winding_number(s.a_plus);
          out["winding_minus"] = winding_number(s.a_minus);
          out["ind_t"] = classical_index_t(s);
          out["min_truncation"] = min_truncation(s);
        }
      }
      const AdmissibilityReport a = is_admissible(s);
      out["admissible"] = a.admissible;
      out["violation_degree"] = a.violation_degree;
      emit(g, out);
      return kPass;
    });
  }
  return kUsage;
}
