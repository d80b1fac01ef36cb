#include "cvxgeo/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cvx {

namespace {

[[noreturn]] void bad(const std::string& what) {
  fail(ErrorCode::parse_error, what);
}

const Json& need(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    bad(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

double need_number(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (!v.is_number()) bad(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

int need_int(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (!v.is_number_integer()) {
    bad(std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<int>();
}

bool scalar_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const Json& e : j) {
    if (e.is_array() || e.is_object()) return false;
  }
  return true;
}

void dump_rec(const Json& j, int depth, int indent, std::string& out) {
  const std::string pad(static_cast<size_t>(depth) * indent, ' ');
  const std::string pad1(static_cast<size_t>(depth + 1) * indent, ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* gap = indent > 0 ? " " : "";
  switch (j.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%lld",
                    static_cast<long long>(j.get<std::int64_t>()));
      out += buf;
      return;
    }
    case Json::value_t::number_unsigned: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%llu",
                    static_cast<unsigned long long>(j.get<std::uint64_t>()));
      out += buf;
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    case Json::value_t::string: {
      // Keys and values in this artifact are plain printable ASCII; escape
      // the JSON specials and fall back to \u for anything below 0x20.
      out += '"';
      for (const char c : j.get<std::string>()) {
        if (c == '"' || c == '\\') {
          out += '\\';
          out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
      }
      out += '"';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (scalar_array(j)) {
        out += '[';
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_rec(j[i], depth, indent, out);
        }
        out += ']';
        return;
      }
      out += '[';
      out += nl;
      for (size_t i = 0; i < j.size(); ++i) {
        out += pad1;
        dump_rec(j[i], depth + 1, indent, out);
        if (i + 1 < j.size()) out += ',';
        out += nl;
      }
      out += pad;
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      out += nl;
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad1;
        out += '"';
        out += it.key();
        out += "\":";
        out += gap;
        dump_rec(it.value(), depth + 1, indent, out);
        if (i + 1 < j.size()) out += ',';
        out += nl;
      }
      out += pad;
      out += '}';
      return;
    }
    default:
      out += "null";
      return;
  }
}

}  // namespace

// ---- Formatting ---------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_rec(j, 0, indent, out);
  return out;
}

// ---- Eigen helpers ------------------------------------------------------

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& j, const char* field) {
  if (!scalar_array(j) || j.empty()) {
    bad(std::string(field) + " must be a nonempty array of numbers");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad(std::string(field) + " has a non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j, const char* field) {
  if (!j.is_array() || j.empty()) {
    bad(std::string(field) + " must be a nonempty array of rows");
  }
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) bad(std::string(field) + " rows must be nonempty arrays");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      bad(std::string(field) + " rows must all have the same length");
    }
    for (size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        bad(std::string(field) + " has a non-numeric entry");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j[i][k].get<double>();
    }
  }
  return m;
}

// ---- Bodies -------------------------------------------------------------

Json to_json(const AffineMap& map) {
  Json j = Json::object();
  j["linear"] = matrix_to_json(map.linear);
  j["translation"] = vector_to_json(map.translation);
  return j;
}

AffineMap affine_from_json(const Json& j) {
  if (!j.is_object()) bad("pose must be an object");
  const Matrix linear = matrix_from_json(need(j, "linear"), "pose.linear");
  const Vector t = vector_from_json(need(j, "translation"), "pose.translation");
  if (linear.rows() != linear.cols() || linear.rows() != t.size()) {
    bad("pose.linear must be square and match pose.translation");
  }
  return {linear, t};
}

Json to_json(const ConvexBody& body) {
  Json data = Json::object();
  switch (body.kind()) {
    case BodyKind::vpolytope:
      data["vertices"] = matrix_to_json(body.base_vertices());
      break;
    case BodyKind::hpolytope:
      data["normals"] = matrix_to_json(body.base_normals());
      data["offsets"] = vector_to_json(body.base_offsets());
      break;
    case BodyKind::lp_ball:
      data["p"] = body.lp_exponent();
      break;
    case BodyKind::ellipsoid:
      data["shape"] = matrix_to_json(body.base_shape());
      break;
  }
  Json j = Json::object();
  j["kind"] = body_kind_name(body.kind());
  j["dim"] = body.dim();
  j["data"] = std::move(data);
  j["pose"] = to_json(body.pose());
  return j;
}

ConvexBody body_from_json(const Json& j) {
  if (!j.is_object()) bad("body must be a JSON object");
  const Json& kind = need(j, "kind");
  if (!kind.is_string()) bad("kind must be a string");
  const std::string name = kind.get<std::string>();
  const int n = need_int(j, "dim");
  if (n < 2) bad("dim must be at least 2");
  AffineMap pose = AffineMap::identity(n);
  if (j.contains("pose") && !j.at("pose").is_null()) {
    pose = affine_from_json(j.at("pose"));
    if (pose.dim() != n) bad("pose dimension does not match dim");
  }
  const Json& data = need(j, "data");
  if (!data.is_object()) bad("data must be an object");

  if (name == "vpolytope") {
    const Matrix verts = matrix_from_json(need(data, "vertices"), "vertices");
    if (verts.cols() != n) bad("vertices must have dim columns");
    return ConvexBody::vpolytope(verts, pose);
  }
  if (name == "hpolytope") {
    const Matrix normals = matrix_from_json(need(data, "normals"), "normals");
    const Vector offsets = vector_from_json(need(data, "offsets"), "offsets");
    if (normals.cols() != n) bad("normals must have dim columns");
    if (normals.rows() != offsets.size()) {
      bad("normals and offsets must have matching counts");
    }
    return ConvexBody::hpolytope(normals, offsets, pose);
  }
  if (name == "lpball") {
    const double p = need_number(data, "p");
    if (!(p > 1.0) || !std::isfinite(p)) bad("lpball p must lie in (1, inf)");
    return ConvexBody::lp_ball(p, n, pose);
  }
  if (name == "ellipsoid") {
    const Matrix shape = matrix_from_json(need(data, "shape"), "shape");
    if (shape.rows() != n || shape.cols() != n) {
      bad("shape must be a dim x dim matrix");
    }
    return ConvexBody::ellipsoid(shape, pose);
  }
  bad("unknown body kind \"" + name + "\"");
}

ConvexBody load_body(const std::string& path) {
  return body_from_json(load_json_file(path));
}

void save_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot open \"" + path + "\" for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) bad("write to \"" + path + "\" failed");
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open \"" + path + "\"");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) bad("\"" + path + "\" is not valid JSON");
  return j;
}

// ---- Results ------------------------------------------------------------

Json to_json(const JohnCertificate& cert) {
  Json contacts = Json::array();
  for (const ContactPair& c : cert.contacts) {
    Json pair = Json::object();
    pair["u"] = vector_to_json(c.u);
    pair["v"] = vector_to_json(c.v);
    contacts.push_back(std::move(pair));
  }
  Json j = Json::object();
  j["contacts"] = std::move(contacts);
  j["weights"] = vector_to_json(cert.weights);
  Json res = Json::object();
  res["identity"] = cert.residual_identity;
  res["u"] = cert.residual_u;
  res["v"] = cert.residual_v;
  j["residuals"] = std::move(res);
  j["shift"] = vector_to_json(cert.shift);
  Json search = Json::object();
  search["converged"] = cert.search_converged;
  search["restarts"] = cert.search_restarts;
  search["evals"] = cert.search_evals;
  j["search"] = std::move(search);
  Json barrier = Json::object();
  barrier["outer_steps"] = cert.barrier_outer_steps;
  barrier["newton_steps"] = cert.barrier_newton_steps;
  barrier["log_det"] = cert.log_det;
  j["barrier"] = std::move(barrier);
  return j;
}

Json to_json(const DecompositionReport& report) {
  Json j = Json::object();
  j["residual_identity"] = report.residual_identity;
  j["residual_u"] = report.residual_u;
  j["residual_v"] = report.residual_v;
  j["weight_sum"] = report.weight_sum;
  j["contact_count"] = report.contact_count;
  j["pass_identity"] = report.pass_identity;
  j["pass_u"] = report.pass_u;
  j["pass_v"] = report.pass_v;
  j["pass_sum"] = report.pass_sum;
  j["pass_count"] = report.pass_count;
  j["pass"] = report.pass();
  return j;
}

Json to_json(const DistanceBound& bound) {
  Json j = Json::object();
  j["kind"] = distance_kind_name(bound.kind);
  j["upper"] = bound.upper;
  j["lower"] = bound.lower;
  j["upper_status"] = cert_name(bound.upper_status);
  j["lower_status"] = cert_name(bound.lower_status);
  Json witness = Json::object();
  witness["map"] = to_json(bound.witness.map);
  witness["inner_shift"] = vector_to_json(bound.witness.inner_shift);
  witness["outer_scale"] = bound.witness.outer_scale;
  witness["sign"] = bound.witness.sign;
  j["witness"] = std::move(witness);
  Json tel = Json::object();
  tel["evals"] = bound.telemetry.evals;
  tel["restarts"] = bound.telemetry.restarts;
  tel["residual"] = bound.telemetry.residual;
  j["telemetry"] = std::move(tel);
  return j;
}

Json to_json(const ModulusCurve& curve) {
  Json samples = Json::array();
  for (const ModulusSample& s : curve.samples) {
    Json row = Json::object();
    row["t"] = s.t;
    row["lower"] = s.lower;
    row["upper"] = s.upper;
    row["certified"] = s.certified;
    samples.push_back(std::move(row));
  }
  Json j = Json::object();
  j["label"] = curve.label;
  j["samples"] = std::move(samples);
  return j;
}

Json to_json(const StabilityReport& report) {
  Json j = Json::object();
  j["n"] = report.n;
  j["kind"] = stability_kind_name(report.kind);
  j["placement"] = vector_to_json(report.placement);
  j["distance_lower"] = report.distance_lower;
  j["eps"] = report.eps;
  j["eps0"] = report.eps0;
  j["applicable"] = report.applicable;
  j["r"] = report.r;
  j["bound"] = report.bound;
  j["eps1"] = report.eps1;
  j["proximity"] = to_json(report.proximity);
  j["violation"] = report.violation;
  return j;
}

const char* distance_kind_name(DistanceKind kind) {
  return kind == DistanceKind::banach_mazur ? "banach_mazur" : "grunbaum";
}

const char* stability_kind_name(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::general: return "general";
    case StabilityKind::symmetric: return "symmetric";
    case StabilityKind::ellipsoid: return "ellipsoid";
  }
  return "unknown";
}

StabilityKind stability_kind_from(const std::string& name) {
  if (name == "general") return StabilityKind::general;
  if (name == "symmetric") return StabilityKind::symmetric;
  if (name == "ellipsoid") return StabilityKind::ellipsoid;
  bad("unknown stability kind \"" + name + "\"");
}

// ---- CSV ----------------------------------------------------------------

std::string curve_to_csv(const ModulusCurve& curve,
                         const std::vector<double>* closed_form) {
  if (closed_form != nullptr && closed_form->size() != curve.samples.size()) {
    fail(ErrorCode::domain_error,
         "curve_to_csv: closed-form column length mismatch");
  }
  std::string out = "t,lower,upper,certified";
  if (closed_form != nullptr) out += ",closed_form";
  out += '\n';
  for (size_t i = 0; i < curve.samples.size(); ++i) {
    const ModulusSample& s = curve.samples[i];
    out += format_double(s.t);
    out += ',';
    out += format_double(s.lower);
    out += ',';
    out += format_double(s.upper);
    out += ',';
    out += s.certified ? '1' : '0';
    if (closed_form != nullptr) {
      out += ',';
      out += format_double((*closed_form)[i]);
    }
    out += '\n';
  }
  return out;
}

std::string stability_csv(const std::vector<StabilityReport>& reports) {
  std::string out = "instance,eps,r,bound,proximity,applicable,violation\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const StabilityReport& r = reports[i];
    out += std::to_string(i);
    out += ',';
    out += format_double(r.eps);
    out += ',';
    out += format_double(r.r);
    out += ',';
    out += format_double(r.bound);
    out += ',';
    out += format_double(r.proximity.upper);
    out += ',';
    out += r.applicable ? '1' : '0';
    out += ',';
    out += r.violation ? '1' : '0';
    out += '\n';
  }
  return out;
}

// ---- Hashing ------------------------------------------------------------

std::uint64_t body_hash(const ConvexBody& body) {
  const std::string text = dump_json(to_json(body));
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string body_hash_hex(const ConvexBody& body) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(body_hash(body)));
  return buf;
}

}  // namespace cvx
