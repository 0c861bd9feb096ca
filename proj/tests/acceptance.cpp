// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.

#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "evenproj/suites.hpp"

using namespace evenproj;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class F>
Outcome guarded(F body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {false, std::string("aborted: ") + e.what()};
  }
}

std::string run_lab(const std::string& args, int& code) {
  const std::string cmd = std::string(EVENPROJ_LAB) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  std::array<char, 65536> buf{};
  size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  code = pclose(p);
  return out;
}

Outcome theorem2_corpus() {
  const auto t0 = Clock::now();
  auto fx = builtin_triples();
  for (auto& r : random_triples(SuiteOptions{}.seed, 6)) fx.push_back(r);
  int held = 0;
  std::string failed;
  for (const auto& f : fx) {
    try {
      const Theorem2Report r = verify_theorem2(f.spec, {24, 32, 48});
      const bool ok = r.holds && (!f.ind_a || r.ind_a == *f.ind_a);
      held += ok;
      if (!ok) failed += " " + f.spec.name;
    } catch (const Error& e) {
      failed += " " + f.spec.name + "(" + e.what() + ")";
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << held << "/" << fx.size() << " triples, " << secs << " s" << (failed.empty() ? "" : ", failed:" + failed);
  return {held == static_cast<int>(fx.size()) && held >= 10 && secs < 60.0, os.str()};
}

Outcome convention() {
  const Loop z = Loop::scalar({{1, 1.0}});
  const TripleSpec t{"convention", MatrixSymbol(z, Loop::identity(1)), ProjectionSpec::bundle(Loop::identity(1)),
                     ProjectionSpec::bundle(Loop::identity(1))};
  const Theorem2Report r = verify_theorem2(t, {24, 32, 48});
  std::ostringstream os;
  os << "ind_a = " << r.ind_a << ", ind_t = " << r.ind_t.str();
  return {r.ind_a == -1 && r.ind_t == Rational(-1), os.str()};
}

Outcome eta_values() {
  const std::vector<std::pair<Poly, double>> cases = {
      {Poly{{0.0, 0.0, 1.0}}, 0.0}, {Poly{{-0.25, 0.0, 1.0}}, -1.0}, {Poly{{1.0, 0.0, 1.0}}, 0.0}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& [q, expected] : cases) {
    EigenModel m{{q}};
    const double e = eta_invariant(m).eta_reduced;
    m.M0 *= 2;
    const double e2 = eta_invariant(m).eta_reduced;
    ok = ok && std::abs(e - expected) <= 1e-6 && std::abs(e2 - e) <= 1e-6;
    os << q.str() << " -> " << e << " ";
  }
  return {ok, os.str()};
}

Outcome prop4() {
  int held = 0, total = 0;
  for (const auto& f : builtin_prop4_models()) {
    if (f.model.order() != 2) continue;
    ++total;
    const Prop4Report r = check_prop4(f.model);
    held += r.equal && (!f.d || r.d == Rational(*f.d));
  }
  return {held == total && total >= 5, std::to_string(held) + "/" + std::to_string(total) + " degree-2 models"};
}

Outcome spectral_flow_families() {
  bool ok = true;
  std::ostringstream os;
  for (const auto& f : builtin_families()) {
    const SpectralFlowReport r = spectral_flow(f.family, 64);
    const bool periodic = f.family.periodic();
    ok = ok && r.agree && (!periodic || r.sf_tracking == 0) && (!f.sf || r.sf_tracking == *f.sf);
    if (f.family.name == "shift") ok = ok && r.sf_tracking == 1;
    os << f.family.name << "=" << r.sf_tracking << " ";
  }
  return {ok, os.str()};
}

Outcome prop3() {
  int held = 0, total = 0;
  bool minus_one = false;
  for (const auto& f : builtin_prop3()) {
    ++total;
    const Prop3Report r = prop3_check(f.spec.build(24));
    const bool ok = r.equal && (!f.ind_a || r.bvp_index == *f.ind_a);
    held += ok;
    minus_one = minus_one || (ok && r.bvp_index == -1);
  }
  return {held == total && total >= 3 && minus_one, std::to_string(held) + "/" + std::to_string(total) + " configurations"};
}

Outcome theorem5() {
  const auto t0 = Clock::now();
  bool ok = true;
  int cases = 0;
  std::ostringstream os;
  for (int r = 0; r <= 3; ++r)
    for (bool add : {false, true}) {
      if (r == 0 && add) continue;
      const Theorem5Report rep = verify_theorem5(dt5_problem(16, add ? 0 : r, add ? r : 0), {12, 16, 24});
      ok = ok && rep.equal;
      ++cases;
    }
  const double secs = seconds_since(t0);
  os << cases << " variants, " << secs << " s";
  return {ok && secs < 300.0, os.str()};
}

Outcome reductions() {
  int held = 0, total = 0;
  size_t samples = 11;
  for (const auto& f : builtin_reductions()) {
    ++total;
    const ReductionChain ch = reduce_to_spectral(f.spec.ns, f.spec.boundary());
    for (const auto& t : ch.traces) samples = std::min(samples, t.params.size());
    held += ch.equal && ch.certified && (!f.index || ch.input_index == *f.index);
  }
  return {held == total && samples == 11,
          std::to_string(held) + "/" + std::to_string(total) + " problems, min samples " + std::to_string(samples)};
}

Outcome congruence() {
  bool ok = true;
  std::ostringstream os;
  for (const auto& f : builtin_congruence()) {
    const ProjectionOperator p = f.build(32);
    std::optional<double> eta;
    if (f.model) eta = eta_invariant(*f.model).eta_reduced;
    const CongruenceReport r = eta_congruence(p, eta, f.triv);
    ok = ok && r.half_integral && r.congruent;
    os << f.name << " ";
  }
  for (const auto& f : builtin_prop4_models()) {
    const double e = eta_invariant(f.model).eta_reduced;
    ok = ok && frac_distance(2.0 * e) <= 1e-6;
  }
  return {ok, os.str()};
}

Outcome determinism() {
  int c1 = 0, c2 = 0;
  const std::string a = run_lab("suite all", c1);
  const std::string b = run_lab("suite all", c2);
  return {c1 == 0 && c2 == 0 && !a.empty() && a == b, std::to_string(a.size()) + " bytes per run"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"index formula on the triple corpus", theorem2_corpus},
      {"convention oracle", convention},
      {"reduced eta values", eta_values},
      {"d equals eta for degree-2 models", prop4},
      {"spectral flow families", spectral_flow_families},
      {"subspace index equals boundary problem index", prop3},
      {"index formula on the spectral example", theorem5},
      {"reduction invariance with certificates", reductions},
      {"eta congruence", congruence},
      {"deterministic suite output", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const Outcome o = guarded(criteria[i].second);
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
