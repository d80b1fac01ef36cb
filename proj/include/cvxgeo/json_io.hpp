#ifndef CVXGEO_JSON_IO_HPP
#define CVXGEO_JSON_IO_HPP

#include "cvxgeo/body.hpp"
#include "cvxgeo/distance.hpp"
#include "cvxgeo/john.hpp"
#include "cvxgeo/moduli.hpp"
#include "cvxgeo/stability.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cvx {

// Insertion-ordered JSON keeps every emitted document byte-stable, which the
// report determinism contract depends on.
using Json = nlohmann::ordered_json;

// ---- Formatting ---------------------------------------------------------

// Shortest %.17g rendering; round-trips every finite double exactly.
std::string format_double(double x);

// Deterministic pretty printer: two-space indent, arrays of scalars on one
// line, every float rendered through format_double (non-finite -> null).
// nlohmann's own dump() is avoided because its float format is not the
// documented 17-significant-digit one.
std::string dump_json(const Json& j, int indent = 0);

// ---- Eigen helpers ------------------------------------------------------

Json vector_to_json(const Vector& v);
Json matrix_to_json(const Matrix& m);  // row-major: one array per row
Vector vector_from_json(const Json& j, const char* field);
Matrix matrix_from_json(const Json& j, const char* field);

// ---- Bodies -------------------------------------------------------------

// {"kind", "dim", "data", "pose"}; data holds vertices / normals+offsets /
// p / shape depending on the kind, pose is {"linear", "translation"}.
Json to_json(const ConvexBody& body);
Json to_json(const AffineMap& map);

// Strict parsers: unknown kinds, missing fields, ragged matrices, and
// dimension mismatches raise ParseError; body invariants (boundedness,
// positive definiteness, ...) are re-validated by the factories.
ConvexBody body_from_json(const Json& j);
AffineMap affine_from_json(const Json& j);

// File round-trip. Loading parses and validates; saving appends a newline.
ConvexBody load_body(const std::string& path);
void save_text(const std::string& text, const std::string& path);
Json load_json_file(const std::string& path);

// ---- Results ------------------------------------------------------------

Json to_json(const JohnCertificate& cert);
Json to_json(const DecompositionReport& report);
Json to_json(const DistanceBound& bound);
Json to_json(const ModulusCurve& curve);
Json to_json(const StabilityReport& report);

const char* distance_kind_name(DistanceKind kind);
const char* stability_kind_name(StabilityKind kind);
StabilityKind stability_kind_from(const std::string& name);  // ParseError

// ---- CSV ----------------------------------------------------------------

// "t,lower,upper,certified" rows; an optional closed-form column is appended
// when `closed_form` is given (must match the sample count).
std::string curve_to_csv(const ModulusCurve& curve,
                         const std::vector<double>* closed_form = nullptr);

// "instance,eps,r,bound,proximity,applicable,violation" rows.
std::string stability_csv(const std::vector<StabilityReport>& reports);

// ---- Hashing ------------------------------------------------------------

// FNV-1a (64-bit) over the canonical dump of to_json(body); stable across
// runs and platforms, used to tag reports with their input bodies.
std::uint64_t body_hash(const ConvexBody& body);
std::string body_hash_hex(const ConvexBody& body);

}  // namespace cvx

#endif  // CVXGEO_JSON_IO_HPP
