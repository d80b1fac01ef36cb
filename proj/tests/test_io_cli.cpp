#include <doctest.h>

#include "cvxgeo/cli.hpp"
#include "cvxgeo/generate.hpp"
#include "cvxgeo/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using cvx::ConvexBody;
using cvx::Json;
using cvx::Vector;

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

struct CliRun {
  int exit = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("cvxgeo");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.exit = cvx::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Writes the body to a temp file and returns the path as a string.
std::string body_file(const char* name, const ConvexBody& body) {
  const auto path = temp_file(name);
  cvx::save_text(cvx::dump_json(cvx::to_json(body), 2), path.string());
  return path.string();
}

std::string simplex2_file() {
  Eigen::MatrixXd pts(3, 2);
  pts << 1.0, 0.0, 0.0, 1.0, -1.0, -1.0;
  return body_file("cvxgeo_cli_simplex2.json", ConvexBody::vpolytope(pts));
}

std::string ball2_file() {
  return body_file("cvxgeo_cli_ball2.json", ConvexBody::lp_ball(2.0, 2));
}

std::string square2_file() {
  return body_file("cvxgeo_cli_square2.json", cvx::cube(2));
}

}  // namespace

TEST_SUITE("io_cli") {

TEST_CASE("doubles survive the 17-digit rendering") {
  const double values[] = {1.0 / 3.0, 0.1,   1e-300, 2.0, -0.0,
                           123456789.123456789, 5.9604647049127553e-11,
                           1e308, -7.25};
  for (const double x : values) {
    const std::string s = cvx::format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(cvx::format_double(2.0) == "2");
  CHECK(cvx::format_double(-1.5) == "-1.5");
}

TEST_CASE("body json round trip preserves every kind") {
  cvx::AffineMap pose{(cvx::Matrix(2, 2) << 1.25, 0.5, -0.25, 2.0).finished(),
                      vec2(0.125, -0.5)};
  const ConvexBody bodies[] = {
      ConvexBody::vpolytope(
          (cvx::Matrix(3, 2) << 1, 0, 0, 1, -1, -1).finished()),
      cvx::cube(2),
      ConvexBody::lp_ball(3.0, 2, pose),
      ConvexBody::ellipsoid(
          (cvx::Matrix(2, 2) << 2.0, 0.3, 0.3, 1.0).finished(), pose),
  };
  const Vector probes[] = {vec2(0.25, 0.125), vec2(-0.5, 0.75),
                           vec2(0.03125, -0.375)};
  for (const ConvexBody& body : bodies) {
    CAPTURE(body_kind_name(body.kind()));
    const std::string text = cvx::dump_json(cvx::to_json(body), 2);
    const ConvexBody back = cvx::body_from_json(Json::parse(text));
    CHECK(back.kind() == body.kind());
    CHECK(back.dim() == body.dim());
    for (const Vector& x : probes) {
      CHECK(cvx::gauge(back, x) ==
            doctest::Approx(cvx::gauge(body, x)).epsilon(1e-14));
    }
    // Re-serialization is byte-identical, so hashing is representation-stable.
    CHECK(cvx::dump_json(cvx::to_json(back), 2) == text);
    CHECK(cvx::body_hash(back) == cvx::body_hash(body));
  }
}

TEST_CASE("compact dump follows the documented schema shape") {
  const std::string text = cvx::dump_json(cvx::to_json(cvx::cube(2)));
  CHECK(text ==
        "{\"kind\":\"hpolytope\",\"dim\":2,"
        "\"data\":{\"normals\":[[1, 0],[-1, 0],[0, 1],[0, -1]],"
        "\"offsets\":[1, 1, 1, 1]},"
        "\"pose\":{\"linear\":[[1, 0],[0, 1]],\"translation\":[0, 0]}}");
  // Determinism: the same value always renders to the same bytes.
  CHECK(cvx::dump_json(cvx::to_json(cvx::cube(2))) == text);
}

TEST_CASE("body files round trip through disk") {
  const auto path = temp_file("cvxgeo_io_roundtrip.json");
  const ConvexBody body = cvx::regular_simplex(3);
  cvx::save_text(cvx::dump_json(cvx::to_json(body), 2), path.string());
  const ConvexBody back = cvx::load_body(path.string());
  CHECK(back.kind() == cvx::BodyKind::vpolytope);
  CHECK((back.vertices() - body.vertices()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(cvx::load_body(path.string()), cvx::Error);
}

TEST_CASE("malformed body documents are rejected") {
  const char* cases[] = {
      // not an object
      "[1, 2]",
      // missing kind
      "{\"dim\": 2, \"data\": {}}",
      // unknown kind
      "{\"kind\": \"torus\", \"dim\": 2, \"data\": {}}",
      // dim too small
      "{\"kind\": \"lpball\", \"dim\": 1, \"data\": {\"p\": 2}}",
      // fractional dim
      "{\"kind\": \"lpball\", \"dim\": 2.5, \"data\": {\"p\": 2}}",
      // p at the excluded endpoint
      "{\"kind\": \"lpball\", \"dim\": 2, \"data\": {\"p\": 1}}",
      // ragged vertex rows
      "{\"kind\": \"vpolytope\", \"dim\": 2,"
      " \"data\": {\"vertices\": [[1, 0], [0, 1], [-1]]}}",
      // wrong column count
      "{\"kind\": \"vpolytope\", \"dim\": 3,"
      " \"data\": {\"vertices\": [[1, 0], [0, 1], [-1, -1], [0, 0]]}}",
      // non-numeric entry
      "{\"kind\": \"vpolytope\", \"dim\": 2,"
      " \"data\": {\"vertices\": [[1, 0], [0, \"x\"], [-1, -1]]}}",
      // offsets count mismatch
      "{\"kind\": \"hpolytope\", \"dim\": 2, \"data\": {\"normals\":"
      " [[1, 0], [-1, 0], [0, 1], [0, -1]], \"offsets\": [1, 1, 1]}}",
      // shape not square
      "{\"kind\": \"ellipsoid\", \"dim\": 2,"
      " \"data\": {\"shape\": [[1, 0, 0], [0, 1, 0]]}}",
      // pose dimension mismatch
      "{\"kind\": \"lpball\", \"dim\": 2, \"data\": {\"p\": 2}, \"pose\":"
      " {\"linear\": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],"
      " \"translation\": [0, 0, 0]}}",
  };
  for (const char* doc : cases) {
    CAPTURE(doc);
    CHECK_THROWS_AS(cvx::body_from_json(Json::parse(doc)), cvx::Error);
  }
  // The error class is the parse one, not a solver failure.
  try {
    cvx::body_from_json(Json::parse("{\"kind\": \"torus\", \"dim\": 2,"
                                    " \"data\": {}}"));
    CHECK(false);
  } catch (const cvx::Error& e) {
    CHECK(e.code() == cvx::ErrorCode::parse_error);
  }
  // Geometric invariants are still enforced by the factories.
  CHECK_THROWS_AS(
      cvx::body_from_json(Json::parse(
          "{\"kind\": \"ellipsoid\", \"dim\": 2,"
          " \"data\": {\"shape\": [[1, 0], [0, -1]]}}")),
      cvx::Error);
}

TEST_CASE("pose defaults to the identity") {
  const ConvexBody body = cvx::body_from_json(
      Json::parse("{\"kind\": \"lpball\", \"dim\": 2, \"data\": {\"p\": 2}}"));
  CHECK(body.pose().is_identity());
  CHECK(cvx::gauge(body, vec2(0.0, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("result serializers expose every field") {
  SUBCASE("distance bound") {
    cvx::DistanceBound b;
    b.kind = cvx::DistanceKind::grunbaum;
    b.upper = 2.5;
    b.lower = 1.25;
    b.upper_status = cvx::Cert::certified;
    b.witness.map = cvx::AffineMap::identity(2);
    b.witness.inner_shift = vec2(0.1, -0.2);
    b.witness.outer_scale = 2.5;
    b.witness.sign = -1;
    b.telemetry.evals = 321;
    const Json j = cvx::to_json(b);
    CHECK(j["kind"] == "grunbaum");
    CHECK(j["upper"].get<double>() == 2.5);
    CHECK(j["lower"].get<double>() == 1.25);
    CHECK(j["upper_status"] == "certified");
    CHECK(j["lower_status"] == "heuristic");
    CHECK(j["witness"]["sign"].get<int>() == -1);
    CHECK(j["witness"]["inner_shift"][0].get<double>() == 0.1);
    CHECK(j["telemetry"]["evals"].get<long>() == 321);
  }
  SUBCASE("modulus curve") {
    cvx::ModulusCurve curve = cvx::lp_modulus_curve(2.0, 3, "disk");
    const Json j = cvx::to_json(curve);
    CHECK(j["label"] == "disk");
    CHECK(j["samples"].size() == 3);
    CHECK(j["samples"][2]["t"].get<double>() == 1.0);
    CHECK(j["samples"][2]["lower"].get<double>() ==
          doctest::Approx(1.0 - std::sqrt(3.0) / 2.0).epsilon(1e-15));
    CHECK(j["samples"][2]["certified"].get<bool>());
  }
  SUBCASE("john certificate") {
    cvx::JohnCertificate cert;
    cert.contacts.push_back({vec2(1, 0), vec2(1, 0)});
    cert.weights = vec2(1.0, 1.0);
    cert.residual_identity = 1e-9;
    cert.shift = vec2(0, 0);
    cert.search_converged = true;
    const Json j = cvx::to_json(cert);
    CHECK(j["contacts"].size() == 1);
    CHECK(j["contacts"][0]["u"][0].get<double>() == 1.0);
    CHECK(j["residuals"]["identity"].get<double>() == 1e-9);
    CHECK(j["search"]["converged"].get<bool>());
    CHECK(j["weights"].size() == 2);
  }
  SUBCASE("stability report") {
    cvx::StabilityReport rep;
    rep.n = 3;
    rep.kind = cvx::StabilityKind::ellipsoid;
    rep.placement = vec2(0, 0);
    rep.eps = 1e-12;
    rep.applicable = true;
    rep.bound = 1.25;
    const Json j = cvx::to_json(rep);
    CHECK(j["n"].get<int>() == 3);
    CHECK(j["kind"] == "ellipsoid");
    CHECK(j["applicable"].get<bool>());
    CHECK(j["bound"].get<double>() == 1.25);
    CHECK(j["proximity"]["kind"] == "banach_mazur");
  }
}

TEST_CASE("csv emitters produce documented columns") {
  SUBCASE("modulus curve with closed form") {
    const cvx::ModulusCurve curve = cvx::lp_modulus_curve(2.0, 3);
    std::vector<double> closed;
    for (const auto& s : curve.samples) {
      closed.push_back(cvx::modulus_lp(2.0, s.t).value);
    }
    const std::string csv = cvx::curve_to_csv(curve, &closed);
    CHECK(csv.substr(0, csv.find('\n')) == "t,lower,upper,certified,closed_form");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("\n0,0,0,1,0\n") != std::string::npos);
    std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(cvx::curve_to_csv(curve, &wrong), cvx::Error);
  }
  SUBCASE("stability batch") {
    std::vector<cvx::StabilityReport> reports(2);
    reports[0].eps = 0.5;
    reports[0].bound = 1.0;
    reports[0].proximity.upper = 1.75;
    reports[1].eps = 1e-10;
    reports[1].applicable = true;
    reports[1].r = 0.25;
    reports[1].bound = 2.0;
    reports[1].proximity.upper = 1.5;
    const std::string csv = cvx::stability_csv(reports);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "instance,eps,r,bound,proximity,applicable,violation");
    CHECK(csv.find("0,0.5,0,1,1.75,0,0\n") != std::string::npos);
    CHECK(csv.find("1,1e-10,0.25,2,1.5,1,0\n") != std::string::npos);
  }
}

TEST_CASE("body hashes separate representations") {
  const std::uint64_t square = cvx::body_hash(cvx::cube(2));
  const std::uint64_t square2 = cvx::body_hash(cvx::cube(2));
  const std::uint64_t disk = cvx::body_hash(ConvexBody::lp_ball(2.0, 2));
  const std::uint64_t cross = cvx::body_hash(cvx::cross_polytope(2));
  CHECK(square == square2);
  CHECK(square != disk);
  CHECK(square != cross);
  CHECK(disk != cross);
  CHECK(cvx::body_hash_hex(cvx::cube(2)).size() == 16);

  // Independent replay of the advertised construction: FNV-1a over the
  // compact dump.
  const std::string text = cvx::dump_json(cvx::to_json(cvx::cube(2)));
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : text) {
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  }
  CHECK(h == square);
}

TEST_CASE("cli distance reproduces analytic values") {
  const std::string square = square2_file();
  const std::string ball = ball2_file();
  const std::string simplex = simplex2_file();

  SUBCASE("square against the disk") {
    const CliRun r = run_cli({"distance", "--input", square, ball});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc["grunbaum"]["upper"].get<double>() ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
    CHECK(doc["banach_mazur"]["upper"].get<double>() ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
  }
  SUBCASE("simplex against the disk attains the planar ceiling") {
    const CliRun r = run_cli({"distance", "--input", simplex, ball});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc["grunbaum"]["upper"].get<double>() ==
          doctest::Approx(2.0).epsilon(1e-5));
    CHECK(doc["asymmetry_lower"].get<double>() == 2.0);
  }
  SUBCASE("a body against itself is exactly one") {
    const CliRun r = run_cli({"distance", "--input", square, square});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc["grunbaum"]["upper"].get<double>() == 1.0);
    CHECK(doc["grunbaum"]["lower"].get<double>() == 1.0);
  }
}

TEST_CASE("cli john certifies the simplex-in-disk decomposition") {
  const CliRun r =
      run_cli({"john", "--input", simplex2_file(), ball2_file()});
  REQUIRE(r.exit == 0);
  const Json doc = Json::parse(r.out);
  CHECK(doc["verification"]["pass"].get<bool>());
  const Json& weights = doc["certificate"]["weights"];
  REQUIRE(weights.size() == 3);
  for (const Json& w : weights) {
    CHECK(w.get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }
}

TEST_CASE("cli modulus emits brackets and the closed-form column") {
  SUBCASE("disk csv brackets the closed form") {
    const CliRun r = run_cli({"modulus", "--input", ball2_file(), "--grid",
                              "4", "--budget", "256", "--format", "csv"});
    REQUIRE(r.exit == 0);
    std::istringstream rows(r.out);
    std::string line;
    REQUIRE(std::getline(rows, line));
    CHECK(line == "t,lower,upper,certified,closed_form");
    int checked = 0;
    while (std::getline(rows, line)) {
      std::istringstream cells(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 5);
      CHECK(v[1] <= v[4] + 1e-12);  // lower <= closed form
      CHECK(v[4] <= v[2] + 1e-3);   // closed form <= upper + slack
      ++checked;
    }
    CHECK(checked == 5);
  }
  SUBCASE("square modulus vanishes and has no closed form") {
    const CliRun r = run_cli({"modulus", "--input", square2_file(), "--grid",
                              "2", "--budget", "128", "--format", "csv"});
    REQUIRE(r.exit == 0);
    std::istringstream rows(r.out);
    std::string line;
    REQUIRE(std::getline(rows, line));
    CHECK(line == "t,lower,upper,certified");
    while (std::getline(rows, line)) {
      CHECK(line.substr(line.find(',') + 1) == "0,0,1");
    }
  }
  SUBCASE("json format carries the curve and closed form") {
    const CliRun r = run_cli({"modulus", "--input", ball2_file(), "--grid",
                              "2", "--budget", "128"});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc["curve"]["samples"].size() == 3);
    CHECK(doc["closed_form"].size() == 3);
  }
}

TEST_CASE("cli stability validates instances end to end") {
  SUBCASE("the equality instance reports both sides at one") {
    const CliRun r = run_cli({"stability", "--input", ball2_file(),
                              simplex2_file(), "--kind", "ellipsoid"});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc["pass"].get<bool>());
    const Json& rep = doc["instances"][0];
    CHECK(rep["eps"].get<double>() == 0.0);
    CHECK(rep["bound"].get<double>() == 1.0);
    CHECK(rep["proximity"]["upper"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("generated batches are violation-free and thread-deterministic") {
    const std::vector<std::string> base = {"stability", "--generate", "6",
                                           "--n", "3", "--seed", "77"};
    std::vector<std::string> serial = base;
    serial.insert(serial.end(), {"--threads", "1"});
    std::vector<std::string> pooled = base;
    pooled.insert(pooled.end(), {"--threads", "4"});
    const CliRun a = run_cli(serial);
    const CliRun b = run_cli(pooled);
    REQUIRE(a.exit == 0);
    REQUIRE(b.exit == 0);
    CHECK(a.out == b.out);
    const Json doc = Json::parse(a.out);
    CHECK(doc["violations"].get<int>() == 0);
    CHECK(doc["instances"].size() == 6);
  }
  SUBCASE("csv format uses the documented columns") {
    const CliRun r = run_cli({"stability", "--generate", "2", "--n", "2",
                              "--format", "csv"});
    REQUIRE(r.exit == 0);
    CHECK(r.out.rfind("instance,eps,r,bound,proximity,applicable,violation",
                      0) == 0);
  }
}

TEST_CASE("cli writes reports to --out and stays byte-stable") {
  const auto out_path = temp_file("cvxgeo_cli_report.json");
  std::filesystem::remove(out_path);
  const std::vector<std::string> args = {"distance",  "--input",
                                         simplex2_file(), ball2_file(),
                                         "--out",     out_path.string()};
  const CliRun filed = run_cli(args);
  REQUIRE(filed.exit == 0);
  CHECK(filed.out.empty());
  REQUIRE(std::filesystem::exists(out_path));

  const CliRun streamed = run_cli(
      {"distance", "--input", simplex2_file(), ball2_file()});
  REQUIRE(streamed.exit == 0);

  std::ifstream in(out_path);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == streamed.out);

  const CliRun again = run_cli(
      {"distance", "--input", simplex2_file(), ball2_file()});
  CHECK(again.out == streamed.out);
  std::filesystem::remove(out_path);
}

TEST_CASE("cli config file supplies defaults that flags override") {
  const auto conf_path = temp_file("cvxgeo_cli_conf.toml");
  cvx::save_text(
      "[stability]\ngenerate = 3\nn = 2\nseed = 5\nformat = \"csv\"",
      conf_path.string());

  const CliRun from_conf =
      run_cli({"--config", conf_path.string(), "stability"});
  REQUIRE(from_conf.exit == 0);
  CHECK(std::count(from_conf.out.begin(), from_conf.out.end(), '\n') == 4);

  const CliRun overridden = run_cli(
      {"--config", conf_path.string(), "stability", "--generate", "2"});
  REQUIRE(overridden.exit == 0);
  CHECK(std::count(overridden.out.begin(), overridden.out.end(), '\n') == 3);
  std::filesystem::remove(conf_path);
}

TEST_CASE("cli exit codes follow the documented contract") {
  SUBCASE("help succeeds") {
    const CliRun r = run_cli({"--help"});
    CHECK(r.exit == 0);
    CHECK(r.out.find("distance") != std::string::npos);
  }
  SUBCASE("unknown subcommands are input errors") {
    CHECK(run_cli({"bogus"}).exit == 2);
  }
  SUBCASE("missing files are input errors") {
    const CliRun r =
        run_cli({"distance", "--input", ball2_file(), "/nonexistent.json"});
    CHECK(r.exit == 2);
    CHECK(r.err.find("parse_error") != std::string::npos);
  }
  SUBCASE("malformed body documents are input errors") {
    const auto bad = temp_file("cvxgeo_cli_bad_body.json");
    cvx::save_text("{\"kind\":\"nonsense\",\"dim\":2}", bad.string());
    CHECK(run_cli({"modulus", "--input", bad.string()}).exit == 2);
    std::filesystem::remove(bad);
  }
  SUBCASE("rejected formats are input errors") {
    CHECK(run_cli({"distance", "--input", ball2_file(), ball2_file(),
                   "--format", "csv"})
              .exit == 2);
  }
  SUBCASE("stability without a mode or with both modes is an input error") {
    CHECK(run_cli({"stability"}).exit == 2);
    CHECK(run_cli({"stability", "--input", ball2_file(), simplex2_file(),
                   "--generate", "2"})
              .exit == 2);
  }
  SUBCASE("a corrupted selftest tolerance is a configuration error") {
    const CliRun r = run_cli({"selftest", "--tol-distance", "-1"});
    CHECK(r.exit == 2);
    CHECK(r.err.find("tolerance") != std::string::npos);
  }
  SUBCASE("non-polytope positioning requests surface as input errors") {
    // The distance pipeline positions the first body, which must be a
    // polytope.
    const CliRun r =
        run_cli({"distance", "--input", ball2_file(), square2_file()});
    CHECK(r.exit == 2);
    CHECK(r.err.find("unsupported") != std::string::npos);
  }
}

}  // TEST_SUITE
