#pragma once

#include <string>

#include <json.hpp>

#include "anlg/grid_function.hpp"
#include "anlg/kernel.hpp"
#include "anlg/nonlocal.hpp"

namespace anlg {

/// Ordered keys keep serialized output stable byte for byte, so "same config,
/// same summary" is checkable with cmp.
using Json = nlohmann::ordered_json;

/// Strict-object guard: throws std::invalid_argument naming the first key of
/// j outside `allowed` (and when j is not an object).  Configs are archival;
/// a misspelled key must fail loudly instead of silently using a default.
void require_keys(const Json& j, const std::string& where,
                  std::initializer_list<const char*> allowed);

Json load_json(const std::string& path);
/// dump(2) plus a trailing newline.
void save_json(const Json& j, const std::string& path);

/// Typed field accessors with config-style error messages; `where` prefixes
/// every complaint so nested blocks stay identifiable.  The *_or variants
/// treat a missing key as the default but still reject wrong types.
double json_num(const Json& j, const std::string& where, const char* key);
double json_num_or(const Json& j, const std::string& where, const char* key, double def);
bool json_bool_or(const Json& j, const std::string& where, const char* key, bool def);
std::string json_str(const Json& j, const std::string& where, const char* key);
std::string json_str_or(const Json& j, const std::string& where, const char* key,
                        const std::string& def);
std::vector<double> json_num_array(const Json& j, const std::string& where, const char* key);
Vec json_vec_or(const Json& j, const std::string& where, const char* key, const Vec& def);

/// {"b": [...], "s": ...}
Anisotropy anisotropy_from_json(const Json& j);
/// Includes the derived exponents, so summaries are self-describing.
Json anisotropy_to_json(const Anisotropy& a);

/// {"r_in", "r_out", "radial_order", "angular_order", "seed"}, every key
/// optional; zeros keep the library's automatic resolution.
QuadratureScheme quadrature_from_json(const Json& j);
Json quadrature_to_json(const QuadratureScheme& q);

/// {"mode": "reference"} or
/// {"mode": "bounded", "lambda": l, "Lambda": L, "multiplier": {"name": ...}}
/// with m(y) = (l+L)/2 + (L-l)/2 * t(y) and t even in y, |t| <= 1:
///   "constant"  t = 0
///   "cosine"    t = cos(y_0 + ... + y_{n-1})
/// Truncated kernels carry callables with no canonical config form and are
/// rejected.  Reference mode rejects bound keys to keep configs unambiguous.
KernelSpec kernel_from_json(const Json& j, const Anisotropy& a);

/// Grid spec {"lo": [...], "hi": [...], "nodes": [...]}; values start at 0.
GridFunction grid_from_json(const Json& j, int n);
/// Box metadata only (lo/hi/nodes/h), for summaries.
Json grid_meta_json(const GridFunction& g);

/// Built-in scalar fields selected by {"name": ...} with per-name parameters,
/// or {"file": path} for an ANLG grid binary evaluated by interpolation:
///   "constant"   {value}
///   "gaussian"   {width=1}              exp(-|x|^2 / width^2)
///   "cosine"     {freq=1}               prod_i cos(freq x_i)
///   "halfspace"  {plus=1, minus=0}      plus where x_0 > 0, minus otherwise
///   "ball"       {radius=1, inside=1, outside=0}   Euclidean ball
///   "tent"       {radius=3}             max(0, 1 - |x|/radius)
std::function<double(const Vec&)> field_from_json(const Json& j, int n);

/// Same selection with regularity metadata attached.  Only entries with a
/// finite second-difference constant qualify: the smooth names (gaussian,
/// cosine) carry analytic constants, grid files the measured bound; the
/// discontinuous names are rejected.
EvaluableFunction evaluable_from_json(const Json& j, int n);

}  // namespace anlg
