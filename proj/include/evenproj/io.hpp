#pragma once

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evenproj/bvp.hpp"

namespace evenproj {

using Json = nlohmann::ordered_json;

// Every reader takes a JSON-pointer-like location so parse errors name the
// offending field.

namespace io {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Parse, (where.empty() ? "/" : where) + ": " + what);
}

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

template <class T>
T get(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(where, e.what());
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j.at(key), where + "/" + key);
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const size_t upto = std::min(text.size(), e.byte > 0 ? static_cast<size_t>(e.byte - 1) : size_t{0});
    int line = 1, col = 1;
    for (size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::Parse, path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

inline CMatrix parse_matrix(const Json& re, const Json& im, int rows, int cols, const std::string& where) {
  CMatrix m(rows, cols);
  for (auto [part, name] : {std::pair{&re, "re"}, std::pair{&im, "im"}}) {
    const std::string w = where + "/" + name;
    if (!part->is_array() || static_cast<int>(part->size()) != rows)
      fail(w, "expected " + std::to_string(rows) + " rows");
    for (int r = 0; r < rows; ++r) {
      const Json& row = (*part)[static_cast<size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        fail(w + "/" + std::to_string(r), "expected " + std::to_string(cols) + " columns");
      for (int c = 0; c < cols; ++c) {
        const double v = get<double>(row[static_cast<size_t>(c)], w + "/" + std::to_string(r) + "/" + std::to_string(c));
        if (std::string(name) == "re") m(r, c).real(v);
        else m(r, c).imag(v);
      }
    }
  }
  return m;
}

inline std::pair<Json, Json> matrix_to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {re, im};
}

/// Row-major little-endian doubles, real and imaginary parts interleaved.
inline std::string encode_base64(const CMatrix& m) {
  using namespace boost::archive::iterators;
  std::vector<char> bytes;
  bytes.reserve(static_cast<size_t>(m.size()) * 16);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (double v : {m(r, c).real(), m(r, c).imag()}) {
        char b[8];
        std::memcpy(b, &v, 8);
        bytes.insert(bytes.end(), b, b + 8);
      }
  using It = base64_from_binary<transform_width<std::vector<char>::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

inline CMatrix decode_base64(const std::string& text, int rows, int cols, const std::string& where) {
  using namespace boost::archive::iterators;
  std::string s = text;
  const size_t pad = s.size() - s.find_last_not_of('=') - 1;
  if (s.size() % 4 != 0) fail(where, "base64 length is not a multiple of 4");
  std::replace(s.end() - static_cast<long>(pad), s.end(), '=', 'A');
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::vector<char> bytes;
  try {
    bytes.assign(It(s.begin()), It(s.end()));
  } catch (const std::exception& e) {
    fail(where, std::string("invalid base64: ") + e.what());
  }
  bytes.resize(bytes.size() - pad);
  if (bytes.size() != static_cast<size_t>(rows) * cols * 16)
    fail(where, "expected " + std::to_string(rows * cols * 16) + " bytes, got " + std::to_string(bytes.size()));
  CMatrix m(rows, cols);
  size_t off = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double re, im;
      std::memcpy(&re, bytes.data() + off, 8);
      std::memcpy(&im, bytes.data() + off + 8, 8);
      off += 16;
      m(r, c) = {re, im};
    }
  return m;
}

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

/// [[k, re, im], ...]
inline Loop parse_loop(const Json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [k, re, im] terms");
  Loop l(rows, cols);
  for (size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "/" + std::to_string(t);
    const Json& term = j[t];
    if (!term.is_array() || term.size() != 3) fail(w, "expected [k, re, im]");
    const int k = get<int>(term[0], w + "/0");
    l.add(k, parse_matrix(term[1], term[2], rows, cols, w));
  }
  return l;
}

inline Json loop_to_json(const Loop& l) {
  Json out = Json::array();
  for (const auto& [k, m] : l.coeffs()) {
    auto [re, im] = matrix_to_json(m);
    out.push_back(Json::array({k, re, im}));
  }
  return out;
}

/// {"n", "order", "a_plus", "a_minus", "lower_terms"}; rectangular symbols
/// give "rows" and "cols" instead of "n". A missing "a_minus" means even.
inline MatrixSymbol parse_symbol(const Json& j, const std::string& where) {
  int rows = 0, cols = 0;
  if (j.contains("n")) rows = cols = get<int>(j.at("n"), where + "/n");
  else {
    rows = get<int>(field(j, "rows", where), where + "/rows");
    cols = get<int>(field(j, "cols", where), where + "/cols");
  }
  if (rows < 0 || cols < 0) fail(where, "negative dimension");
  const int order = get_or<int>(j, "order", 0, where);
  Loop plus = parse_loop(field(j, "a_plus", where), rows, cols, where + "/a_plus");
  Loop minus = j.contains("a_minus") ? parse_loop(j.at("a_minus"), rows, cols, where + "/a_minus") : plus;
  MatrixSymbol s(plus, minus, order);
  if (j.contains("lower_terms")) {
    const Json& lt = j.at("lower_terms");
    if (!lt.is_array()) fail(where + "/lower_terms", "expected an array");
    for (size_t t = 0; t < lt.size(); ++t) {
      const std::string w = where + "/lower_terms/" + std::to_string(t);
      LowerTerm term;
      term.degree = get<int>(field(lt[t], "degree", w), w + "/degree");
      term.plus = parse_loop(field(lt[t], "a_plus", w), rows, cols, w + "/a_plus");
      term.minus = lt[t].contains("a_minus") ? parse_loop(lt[t].at("a_minus"), rows, cols, w + "/a_minus") : term.plus;
      s.lower_terms.push_back(term);
    }
  }
  return s;
}

inline Json symbol_to_json(const MatrixSymbol& s) {
  Json j;
  if (s.a_plus.square()) j["n"] = s.n();
  else {
    j["rows"] = s.a_plus.rows();
    j["cols"] = s.a_plus.cols();
  }
  j["order"] = s.order;
  j["a_plus"] = loop_to_json(s.a_plus);
  j["a_minus"] = loop_to_json(s.a_minus);
  Json lt = Json::array();
  for (const auto& t : s.lower_terms)
    lt.push_back({{"degree", t.degree}, {"a_plus", loop_to_json(t.plus)}, {"a_minus", loop_to_json(t.minus)}});
  j["lower_terms"] = lt;
  return j;
}

inline Poly parse_poly(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty coefficient array");
  return Poly{get<std::vector<double>>(j, where)};
}

// ---------------------------------------------------------------------------
// Projections, triples, models, families
// ---------------------------------------------------------------------------

inline std::vector<std::pair<int, int>> parse_modes(const Json& j, const std::string& where) {
  std::vector<std::pair<int, int>> out;
  if (!j.is_array()) fail(where, "expected [[mode, slot], ...]");
  for (size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "/" + std::to_string(t);
    if (!j[t].is_array() || j[t].size() != 2) fail(w, "expected [mode, slot]");
    out.emplace_back(get<int>(j[t][0], w + "/0"), get<int>(j[t][1], w + "/1"));
  }
  return out;
}

/// {"kind": "bundle", "p": loop, "fiber"} | {"kind": "finite", "fiber", "lo", "hi"}
/// | {"kind": "spectral", "q": [[c0, c1, ...], ...]}, each with optional
/// "add" / "remove" lists of [mode, slot].
inline ProjectionSpec parse_projection_spec(const Json& j, const std::string& where) {
  const std::string kind = get<std::string>(field(j, "kind", where), where + "/kind");
  ProjectionSpec s;
  if (kind == "bundle") {
    const int fiber = get_or<int>(j, "fiber", 1, where);
    s = ProjectionSpec::bundle(parse_loop(field(j, "p", where), fiber, fiber, where + "/p"));
  } else if (kind == "finite") {
    s = ProjectionSpec::finite(get_or<int>(j, "fiber", 1, where), get<int>(field(j, "lo", where), where + "/lo"),
                               get<int>(field(j, "hi", where), where + "/hi"));
  } else if (kind == "spectral") {
    const Json& q = field(j, "q", where);
    if (!q.is_array() || q.empty()) fail(where + "/q", "expected one polynomial per slot");
    std::vector<Poly> polys;
    for (size_t i = 0; i < q.size(); ++i) polys.push_back(parse_poly(q[i], where + "/q/" + std::to_string(i)));
    s = ProjectionSpec::spectral(polys);
  } else {
    fail(where + "/kind", "unknown projection kind '" + kind + "'");
  }
  if (j.contains("add")) s.add = parse_modes(j.at("add"), where + "/add");
  if (j.contains("remove")) s.remove = parse_modes(j.at("remove"), where + "/remove");
  return s;
}

inline Json projection_spec_to_json(const ProjectionSpec& s) {
  Json j;
  switch (s.kind) {
    case ProjectionSpec::Kind::Bundle:
      j["kind"] = "bundle";
      j["fiber"] = s.fiber;
      j["p"] = loop_to_json(s.p);
      break;
    case ProjectionSpec::Kind::Finite:
      j["kind"] = "finite";
      j["fiber"] = s.fiber;
      j["lo"] = s.lo;
      j["hi"] = s.hi;
      break;
    case ProjectionSpec::Kind::Spectral: {
      j["kind"] = "spectral";
      Json q = Json::array();
      for (auto& p : s.q) q.push_back(p.c);
      j["q"] = q;
      break;
    }
  }
  auto modes = [](const std::vector<std::pair<int, int>>& v) {
    Json a = Json::array();
    for (auto [n, i] : v) a.push_back({n, i});
    return a;
  };
  if (!s.add.empty()) j["add"] = modes(s.add);
  if (!s.remove.empty()) j["remove"] = modes(s.remove);
  return j;
}

inline TripleSpec parse_triple(const Json& j, const std::string& where = "") {
  TripleSpec t;
  t.name = get_or<std::string>(j, "name", "triple", where);
  t.a = parse_symbol(field(j, "a", where), where + "/a");
  t.p1 = parse_projection_spec(field(j, "p1", where), where + "/p1");
  t.p2 = parse_projection_spec(field(j, "p2", where), where + "/p2");
  if (t.p1.fiber != t.a.n() || t.p2.fiber != t.a.n()) fail(where, "projection fibers must match the symbol size");
  return t;
}

inline Json triple_to_json(const TripleSpec& t) {
  return {{"name", t.name}, {"a", symbol_to_json(t.a)}, {"p1", projection_spec_to_json(t.p1)},
          {"p2", projection_spec_to_json(t.p2)}};
}

/// Dense projection file: {"symbol", "N", "matrix": {"rows", "cols", "base64"}}.
/// Without "matrix" the projection is rebuilt from "spec" or, for an even
/// symbol, as the bundle projection of a_plus.
inline ProjectionOperator parse_projection(const Json& j, const std::string& where = "") {
  const int N = get<int>(field(j, "N", where), where + "/N");
  if (N < 1) fail(where + "/N", "truncation must be positive");
  if (!j.contains("matrix")) {
    if (j.contains("spec")) return parse_projection_spec(j.at("spec"), where + "/spec").build(N);
    const MatrixSymbol s = parse_symbol(field(j, "symbol", where), where + "/symbol");
    if (!s.is_even()) fail(where + "/symbol", "bundle projection needs an even symbol");
    return bundle_projection(s.a_plus, N);
  }
  const MatrixSymbol s = parse_symbol(field(j, "symbol", where), where + "/symbol");
  const Json& mj = j.at("matrix");
  const std::string mw = where + "/matrix";
  const int rows = get<int>(field(mj, "rows", mw), mw + "/rows");
  const int cols = get<int>(field(mj, "cols", mw), mw + "/cols");
  ProjectionOperator p;
  p.op.layout = {N, s.n()};
  if (rows != p.op.layout.dim() || cols != rows) fail(mw, "matrix size does not match N and the symbol size");
  p.op.matrix = decode_base64(get<std::string>(field(mj, "base64", mw), mw + "/base64"), rows, cols, mw + "/base64");
  certify_idempotent(p.op.matrix);
  p.symbol = s;
  p.op.symbol = s;
  p.op.provenance = "file";
  p.even = s.is_even();
  p.orthogonal = (p.op.matrix - p.op.matrix.adjoint()).norm() <= 1e-10 * std::max(1.0, p.op.matrix.norm());
  p.op.hermitian = p.orthogonal;
  return p;
}

inline Json projection_to_json(const ProjectionOperator& p) {
  return {{"symbol", symbol_to_json(p.symbol)},
          {"N", p.N()},
          {"matrix", {{"rows", p.matrix().rows()}, {"cols", p.matrix().cols()}, {"base64", encode_base64(p.matrix())}}}};
}

/// {"q": [[c0, c1, ...], ...], "M0": 200, "K": 6}
inline EigenModel parse_model(const Json& j, const std::string& where = "") {
  EigenModel m;
  const Json& q = field(j, "q", where);
  if (!q.is_array() || q.empty()) fail(where + "/q", "expected one polynomial per slot");
  for (size_t i = 0; i < q.size(); ++i) m.q.push_back(parse_poly(q[i], where + "/q/" + std::to_string(i)));
  m.M0 = get_or<int>(j, "M0", m.M0, where);
  m.K = get_or<int>(j, "K", m.K, where);
  if (m.M0 < 10 || m.K < 1) fail(where, "M0 must be >= 10 and K >= 1");
  return m;
}

inline Json model_to_json(const EigenModel& m) {
  Json q = Json::array();
  for (auto& p : m.q) q.push_back(p.c);
  return {{"q", q}, {"M0", m.M0}, {"K", m.K}};
}

/// {"name", "N", "slots": [{"base": [...], "shift": 1, "profile":
///   {"kind": "linear", "from", "to"} | {"kind": "sine", "offset", "amplitude", "phase"}}]}
inline DiagonalFamily parse_family(const Json& j, const std::string& where = "") {
  DiagonalFamily f;
  f.name = get_or<std::string>(j, "name", "family", where);
  f.N = get_or<int>(j, "N", f.N, where);
  const Json& slots = field(j, "slots", where);
  if (!slots.is_array() || slots.empty()) fail(where + "/slots", "expected a nonempty array");
  for (size_t i = 0; i < slots.size(); ++i) {
    const std::string w = where + "/slots/" + std::to_string(i);
    FamilySlot s;
    s.base = parse_poly(field(slots[i], "base", w), w + "/base");
    s.shift = get_or<double>(slots[i], "shift", 1.0, w);
    const Json& pr = field(slots[i], "profile", w);
    const std::string kind = get<std::string>(field(pr, "kind", w + "/profile"), w + "/profile/kind");
    if (kind == "linear") {
      s.profile.kind = Profile::Kind::Linear;
      s.profile.from = get_or<double>(pr, "from", 0.0, w + "/profile");
      s.profile.to = get_or<double>(pr, "to", 1.0, w + "/profile");
    } else if (kind == "sine") {
      s.profile.kind = Profile::Kind::Sine;
      s.profile.offset = get_or<double>(pr, "offset", 0.0, w + "/profile");
      s.profile.amplitude = get_or<double>(pr, "amplitude", 1.0, w + "/profile");
      s.profile.phase = get_or<double>(pr, "phase", 0.0, w + "/profile");
    } else {
      fail(w + "/profile/kind", "unknown profile '" + kind + "'");
    }
    f.slots.push_back(s);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Boundary value problems
// ---------------------------------------------------------------------------

/// Parsed problem. "coeffs" holds C_0..C_m with D = sum_k C_k dt^k for
/// normalization "dt" and D = sum_k C_k (-i dt)^k for "-idt". "boundary.B"
/// is G x (m n) on normalized jets and "boundary.P" a projection spec.
/// {"dt5": {"removed", "added", "zero_block"}} selects the built-in spectral
/// problem instead.
struct ProblemSpec {
  std::string name;
  std::string normalization = "-idt";
  NormalSymbol ns;
  MatrixSymbol B;
  ProjectionSpec P;
  int N = 16;
  bool dt5 = false;
  int removed = 0, added = 0, zero_block = 0;

  BoundaryData boundary() const { return {B, P.build(N)}; }
};

inline ProblemSpec parse_problem(const Json& j, const std::string& where = "") {
  ProblemSpec p;
  p.name = get_or<std::string>(j, "name", "problem", where);
  p.N = get_or<int>(j, "N", p.N, where);
  if (p.N < 4) fail(where + "/N", "truncation must be at least 4");
  if (j.contains("dt5")) {
    const Json& d = j.at("dt5");
    p.dt5 = true;
    p.removed = get_or<int>(d, "removed", 0, where + "/dt5");
    p.added = get_or<int>(d, "added", 0, where + "/dt5");
    p.zero_block = get_or<int>(d, "zero_block", 0, where + "/dt5");
    if (p.removed < 0 || p.added < 0 || p.zero_block < 0) fail(where + "/dt5", "counts must be nonnegative");
    return p;
  }
  const int m = get<int>(field(j, "order", where), where + "/order");
  if (m < 1) fail(where + "/order", "order must be >= 1");
  p.normalization = get_or<std::string>(j, "normalization", "-idt", where);
  if (p.normalization != "dt" && p.normalization != "-idt")
    fail(where + "/normalization", "expected \"dt\" or \"-idt\"");
  const Json& coeffs = field(j, "coeffs", where);
  if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != m + 1)
    fail(where + "/coeffs", "expected order + 1 coefficient symbols");
  for (int k = 0; k <= m; ++k) {
    MatrixSymbol c = parse_symbol(coeffs[static_cast<size_t>(k)], where + "/coeffs/" + std::to_string(k));
    if (p.normalization == "dt") {
      const cplx f = std::pow(kI, k);  // dt = i tau
      c = MatrixSymbol(f * c.a_plus, f * c.a_minus, c.order);
    }
    if (!p.ns.d.empty() && c.n() != p.ns.n()) fail(where + "/coeffs/" + std::to_string(k), "size mismatch");
    p.ns.d.push_back(c);
  }
  const Json& b = field(j, "boundary", where);
  p.B = parse_symbol(field(b, "B", where + "/boundary"), where + "/boundary/B");
  p.P = parse_projection_spec(field(b, "P", where + "/boundary"), where + "/boundary/P");
  if (p.B.a_plus.cols() != m * p.ns.n()) fail(where + "/boundary/B", "B must have m n columns");
  if (p.B.a_plus.rows() != p.P.fiber) fail(where + "/boundary", "B rows must match the fiber of P");
  return p;
}

}  // namespace io
}  // namespace evenproj
