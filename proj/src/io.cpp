#include "affine/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <type_traits>

#include "affine/error.hpp"

namespace affine {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(Error::Kind::ModelFormat, "model field '" + field + "': " + msg);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number, got " + std::string(v.type_name()));
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "not finite");
  return x;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Vec vector(const json& v, const std::string& path, int expected = -1) {
  if (!v.is_array()) fail(path, "expected an array");
  if (expected >= 0 && static_cast<int>(v.size()) != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Mat symmetric(const json& v, int p, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  Mat m(p, p);
  if (!v.empty() && v[0].is_array()) {
    if (static_cast<int>(v.size()) != p) fail(path, "expected " + std::to_string(p) + " rows");
    for (int i = 0; i < p; ++i) {
      const Vec row = vector(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]", p);
      m.row(i) = row.transpose();
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail(path, "matrix is not symmetric");
    return m;
  }
  const Vec tri = vector(v, path, p * (p + 1) / 2);
  int k = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      m(i, j) = tri(k);
      m(j, i) = tri(k);
      ++k;
    }
  return m;
}

std::vector<Atom> atoms(const json& v, int p, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  std::vector<Atom> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const std::string at = path + "[" + std::to_string(j) + "]";
    Atom a;
    a.weight = number(member(v[j], "weight", at), at + ".weight");
    a.z = vector(member(v[j], "z", at), at + ".z", p);
    out.push_back(std::move(a));
  }
  return out;
}

JumpMeasure measure(const json& v, int p, const std::string& path) {
  const json& fam = member(v, "family", path);
  if (!fam.is_string()) fail(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  try {
    if (name == "none") return JumpMeasure(p);
    if (name == "finite_atomic") return JumpMeasure::finite_atomic(p, atoms(member(v, "atoms", path), p, path + ".atoms"));
    if (name == "exponential_ray")
      return JumpMeasure::exponential_ray(p, number(member(v, "mass", path), path + ".mass"),
                                          number(member(v, "rate", path), path + ".rate"),
                                          vector(member(v, "direction", path), path + ".direction", p));
    if (name == "tabulated") {
      if (v.contains("nodes")) return JumpMeasure::tabulated(p, atoms(v["nodes"], p, path + ".nodes"));
      const Vec d = vector(member(v, "direction", path), path + ".direction", p);
      const Vec grid = vector(member(v, "grid", path), path + ".grid");
      const Vec dens = vector(member(v, "density", path), path + ".density", static_cast<int>(grid.size()));
      return JumpMeasure::tabulated_ray(d, {grid.data(), grid.data() + grid.size()},
                                        {dens.data(), dens.data() + dens.size()});
    }
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::ModelFormat) throw;
    fail(path, e.what());
  }
  fail(path + ".family", "unknown family '" + name + "'");
}

StateSpace space(const json& v, int p) {
  const std::string path = "state_space";
  const json& kind = member(v, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  const std::string name = kind.get<std::string>();
  try {
    if (name == "canonical") return StateSpace::canonical(integer(member(v, "m", path), path + ".m"), p);
    if (name == "psd") {
      const int d = integer(member(v, "d", path), path + ".d");
      if (d < 1 || d * (d + 1) / 2 != p)
        fail(path + ".d", "d(d+1)/2 must equal dim = " + std::to_string(p));
      return StateSpace::psd(d);
    }
    if (name == "lorentz") return StateSpace::lorentz(p);
    if (name == "parabolic") return StateSpace::parabolic(p);
    if (name == "half_spaces") {
      const json& cs = member(v, "constraints", path);
      if (!cs.is_array()) fail(path + ".constraints", "expected an array");
      std::vector<HalfSpace> hs;
      for (std::size_t j = 0; j < cs.size(); ++j) {
        const std::string at = path + ".constraints[" + std::to_string(j) + "]";
        hs.push_back({vector(member(cs[j], "normal", at), at + ".normal", p),
                      number(member(cs[j], "offset", at), at + ".offset")});
      }
      return StateSpace::half_spaces(p, std::move(hs));
    }
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::ModelFormat) throw;
    fail(path, e.what());
  }
  fail(path + ".kind", "unknown state space '" + name + "'");
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json atoms_json(const std::vector<Atom>& as) {
  json out = json::array();
  for (const Atom& a : as) out.push_back({{"weight", a.weight}, {"z", vec_json(a.z)}});
  return out;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

AffineModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Error::Kind::ModelFormat, "model must be a JSON object");
  const int p = integer(member(doc, "dim", ""), "dim");
  if (p < 1) fail("dim", "must be positive");
  StateSpace ss = space(member(doc, "state_space", ""), p);
  const Vec a0 = vector(member(doc, "a0", ""), "a0", p);
  const Vec a_flat = vector(member(doc, "a", ""), "a", p * p);
  const Mat a = Eigen::Map<const Mat>(a_flat.data(), p, p);
  const json& jA = member(doc, "A", "");
  if (!jA.is_array() || static_cast<int>(jA.size()) != p + 1)
    fail("A", "expected an array of " + std::to_string(p + 1) + " matrices");
  std::vector<Mat> A;
  for (int i = 0; i <= p; ++i)
    A.push_back(symmetric(jA[static_cast<std::size_t>(i)], p, "A[" + std::to_string(i) + "]"));
  std::vector<JumpMeasure> K;
  if (doc.contains("K") && !doc["K"].is_null()) {
    const json& jK = doc["K"];
    if (!jK.is_array()) fail("K", "expected an array");
    if (!jK.empty()) {
      if (static_cast<int>(jK.size()) != p + 1)
        fail("K", "expected " + std::to_string(p + 1) + " records, got " + std::to_string(jK.size()));
      for (int i = 0; i <= p; ++i)
        K.push_back(measure(jK[static_cast<std::size_t>(i)], p, "K[" + std::to_string(i) + "]"));
    }
  }
  try {
    return AffineModel(std::move(ss), a0, a, std::move(A), std::move(K));
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::DimensionMismatch) throw;
    fail("model", e.what());
  }
}

json model_to_json(const AffineModel& model) {
  const int p = model.dim();
  json doc;
  doc["dim"] = p;
  std::visit(
      [&](const auto& k) {
        using S = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<S, Canonical>) doc["state_space"] = {{"kind", "canonical"}, {"m", k.m}};
        if constexpr (std::is_same_v<S, PSDCone>) doc["state_space"] = {{"kind", "psd"}, {"d", k.d}};
        if constexpr (std::is_same_v<S, Lorentz>) doc["state_space"] = {{"kind", "lorentz"}};
        if constexpr (std::is_same_v<S, Parabolic>) doc["state_space"] = {{"kind", "parabolic"}};
        if constexpr (std::is_same_v<S, HalfSpaces>) {
          json cs = json::array();
          for (const auto& h : k.constraints) cs.push_back({{"normal", vec_json(h.normal)}, {"offset", h.offset}});
          doc["state_space"] = {{"kind", "half_spaces"}, {"constraints", cs}};
        }
      },
      model.state_space().kind());
  doc["a0"] = vec_json(model.a0());
  doc["a"] = vec_json(Eigen::Map<const Vec>(model.a().data(), p * p));
  json jA = json::array();
  for (const Mat& m : model.A()) {
    json tri = json::array();
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) tri.push_back(m(i, j));
    jA.push_back(tri);
  }
  doc["A"] = jA;
  json jK = json::array();
  for (const JumpMeasure& k : model.K()) {
    if (k.empty() && std::holds_alternative<FiniteAtomic>(k.family())) {
      jK.push_back({{"family", "none"}});
      continue;
    }
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, FiniteAtomic>)
            jK.push_back({{"family", "finite_atomic"}, {"atoms", atoms_json(f.atoms)}});
          if constexpr (std::is_same_v<F, ExponentialRay>)
            jK.push_back({{"family", "exponential_ray"},
                          {"mass", f.mass},
                          {"rate", f.rate},
                          {"direction", vec_json(f.direction)}});
          if constexpr (std::is_same_v<F, TabulatedDensity>)
            jK.push_back({{"family", "tabulated"}, {"nodes", atoms_json(f.nodes)}});
        },
        k.family());
  }
  doc["K"] = jK;
  return doc;
}

AffineModel parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Error::Kind::ModelFormat, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

AffineModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::InvalidArgument, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

void save_model(const AffineModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Error::Kind::InvalidArgument, "cannot write model file " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

Complex parse_complex(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  auto bad = [&]() -> Complex {
    throw Error(Error::Kind::InvalidArgument, "cannot parse complex number '" + raw + "'");
  };
  if (s.empty()) return bad();
  // split at the last sign that is not the leading sign or part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t i = 1; i < s.size(); ++i)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') split = i;
  auto real_part = [&](const std::string& t) -> double {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      bad();
    }
    if (used != t.size()) bad();
    return v;
  };
  auto imag_part = [&](const std::string& t) -> double {
    if (t.empty() || (t.back() != 'i' && t.back() != 'j')) bad();
    const std::string body = t.substr(0, t.size() - 1);
    if (body.empty() || body == "+") return 1.0;
    if (body == "-") return -1.0;
    return real_part(body);
  };
  const bool has_i = s.back() == 'i' || s.back() == 'j';
  if (!has_i) {
    if (split != std::string::npos) return bad();
    return {real_part(s), 0.0};
  }
  if (split == std::string::npos) return {0.0, imag_part(s)};
  return {real_part(s.substr(0, split)), imag_part(s.substr(split))};
}

CVec parse_complex_vector(const std::string& text) {
  std::vector<Complex> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(parse_complex(item));
  if (vals.empty()) throw Error(Error::Kind::InvalidArgument, "empty vector '" + text + "'");
  return Eigen::Map<const CVec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Vec parse_real_vector(const std::string& text) {
  const CVec v = parse_complex_vector(text);
  if (v.imag().cwiseAbs().maxCoeff() != 0.0)
    throw Error(Error::Kind::InvalidArgument, "expected real entries in '" + text + "'");
  return v.real();
}

json complex_json(Complex z) { return {{"re", number_or_null(z.real())}, {"im", number_or_null(z.imag())}}; }

json complex_vector_json(const CVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

json to_json(const RiccatiSolution& sol) {
  json out;
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Solved>) {
          out["verdict"] = "solved";
          out["horizon"] = v.horizon;
        } else {
          out["verdict"] = "exploded";
          out["t_lo"] = v.t_lo;
          out["t_hi"] = v.t_hi;
          out["t_inf_estimate"] = number_or_null(v.estimate);
        }
      },
      sol.verdict());
  out["u"] = complex_vector_json(sol.u());
  out["t"] = sol.last_time();
  out["psi0"] = complex_json(sol.terminal_psi0());
  out["psi"] = complex_vector_json(sol.terminal_psi());
  out["steps"] = sol.grid().size() - 1;
  return out;
}

json to_json(const ExplosionTime& e) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, FiniteExplosion>)
          return {{"verdict", "finite"}, {"estimate", v.estimate}, {"lo", v.lo}, {"hi", v.hi}};
        else
          return {{"verdict", "exceeds_horizon"}, {"t_max", v.t_max}};
      },
      e);
}

json to_json(const TransformValue& tv) {
  json out;
  out["verdict"] = verdict_name(tv);
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, FiniteValue>) {
          out["value"] = complex_json(v.value);
          out["psi0"] = complex_json(v.psi0);
          out["psi"] = complex_vector_json(v.psi);
        } else if constexpr (std::is_same_v<V, Explosive>) {
          out["value"] = "infinity";
          out["t_inf"] = v.t_inf;
        } else if constexpr (std::is_same_v<V, ZeroRegion>) {
          out["value"] = complex_json(Complex(0.0, 0.0));
          out["t_inf"] = v.t_inf;
        } else {
          out["diagnostic"] = v.diagnostic;
        }
      },
      tv);
  return out;
}

json to_json(const RayProbe& probe) {
  json out;
  out["verdict"] = std::isfinite(probe.lambda_star) ? "bounded" : "unbounded";
  out["direction"] = vec_json(probe.direction);
  out["horizon"] = probe.horizon;
  out["lambda_star"] = number_or_null(probe.lambda_star);
  out["bracket_width"] = number_or_null(probe.bracket_width);
  json pts = json::array();
  for (const auto& pt : probe.probes)
    pts.push_back({{"lambda", pt.lambda}, {"exploded", pt.exploded}, {"t_inf_estimate", number_or_null(pt.t_inf_estimate)}});
  out["probes"] = pts;
  return out;
}

json to_json(const MCEstimate& est) {
  return {{"re", number_or_null(est.value.real())},
          {"im", number_or_null(est.value.imag())},
          {"std_error", number_or_null(est.std_error)},
          {"n_paths", est.n_paths},
          {"infinite", est.infinite}};
}

json to_json(const AdmissibilityReport& rep) {
  json out;
  out["verdict"] = rep.pass ? "pass" : "fail";
  out["n_samples"] = rep.sampled_points.size();
  out["min_eigen_c"] = number_or_null(rep.min_eigen_c);
  out["min_eigen_point"] = vec_json(rep.min_eigen_point);
  out["min_jump_weight"] = number_or_null(rep.min_jump_weight);
  json viol = json::array();
  for (const Vec& z : rep.support_violations) viol.push_back(vec_json(z));
  out["support_violations"] = viol;
  out["tol"] = rep.tol;
  return out;
}

json to_json(const DampedSequence& seq) {
  json out;
  out["verdict"] = "finite";
  out["n"] = seq.n_list;
  json vals = json::array();
  for (Complex v : seq.values) vals.push_back(complex_json(v));
  out["values"] = vals;
  out["cauchy"] = seq.cauchy;
  if (seq.undamped) {
    out["undamped"] = complex_json(*seq.undamped);
    out["distance_to_undamped"] = seq.distance_to_undamped;
  }
  return out;
}

json to_json(const MartingaleDiagnostic& diag) {
  json out;
  out["verdict"] = diag.max_standardized_drift < 4.0 ? "pass" : "fail";
  out["times"] = diag.times;
  json means = json::array();
  for (Complex m : diag.means) means.push_back(complex_json(m));
  out["means"] = means;
  out["std_errors"] = diag.std_errors;
  out["standardized"] = diag.standardized;
  out["initial_value"] = complex_json(diag.initial_value);
  out["max_standardized_drift"] = diag.max_standardized_drift;
  out["discretization_allowance"] = diag.discretization_allowance;
  return out;
}

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

}  // namespace

std::string solution_csv(const RiccatiSolution& sol) {
  const auto p = sol.u().size();
  auto os = csv_stream();
  os << "t,re_psi0,im_psi0";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",re_psi" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",im_psi" << i;
  os << '\n';
  for (std::size_t k = 0; k < sol.grid().size(); ++k) {
    os << sol.grid()[k] << ',' << sol.psi0()[k].real() << ',' << sol.psi0()[k].imag();
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << sol.psi()[k](i).real();
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << sol.psi()[k](i).imag();
    os << '\n';
  }
  return os.str();
}

std::string ray_probe_csv(const RayProbe& probe) {
  auto os = csv_stream();
  os << "lambda,t_inf_estimate,verdict\n";
  for (const auto& pt : probe.probes)
    os << pt.lambda << ',' << pt.t_inf_estimate << ',' << (pt.exploded ? "exploded" : "solved") << '\n';
  return os.str();
}

std::string ensemble_summary_csv(const PathEnsemble& ens) {
  auto os = csv_stream();
  os << 't';
  for (int i = 1; i <= ens.dim; ++i) os << ",mean" << i << ",std" << i << ",min" << i << ",max" << i;
  os << '\n';
  for (int ck = 0; ck <= ens.last_checkpoint(); ++ck) {
    os << ens.times[static_cast<std::size_t>(ck)];
    for (int i = 0; i < ens.dim; ++i) {
      double mean = 0.0, m2 = 0.0;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int path = 0; path < ens.n_paths; ++path) {
        const double v = ens.state(ck, path)(i);
        const double d = v - mean;
        mean += d / (path + 1);
        m2 += d * (v - mean);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double sd = ens.n_paths > 1 ? std::sqrt(m2 / (ens.n_paths - 1)) : 0.0;
      os << ',' << mean << ',' << sd << ',' << lo << ',' << hi;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace affine
