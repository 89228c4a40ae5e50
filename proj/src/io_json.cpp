#include "anlg/io_json.hpp"

#include <cstring>
#include <fstream>
#include <memory>

namespace anlg {

double json_num(const Json& j, const std::string& where, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(where + ": missing \"" + key + "\"");
    const Json& v = j.at(key);
    if (!v.is_number())
        throw std::invalid_argument(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

double json_num_or(const Json& j, const std::string& where, const char* key, double def) {
    if (!j.contains(key)) return def;
    const Json& v = j.at(key);
    if (!v.is_number())
        throw std::invalid_argument(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

bool json_bool_or(const Json& j, const std::string& where, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const Json& v = j.at(key);
    if (!v.is_boolean())
        throw std::invalid_argument(where + ": \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

std::string json_str(const Json& j, const std::string& where, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(where + ": missing \"" + key + "\"");
    const Json& v = j.at(key);
    if (!v.is_string())
        throw std::invalid_argument(where + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::string json_str_or(const Json& j, const std::string& where, const char* key,
                        const std::string& def) {
    if (!j.contains(key)) return def;
    const Json& v = j.at(key);
    if (!v.is_string())
        throw std::invalid_argument(where + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::vector<double> json_num_array(const Json& j, const std::string& where, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(where + ": missing \"" + key + "\"");
    const Json& v = j.at(key);
    if (!v.is_array())
        throw std::invalid_argument(where + ": \"" + key + "\" must be an array");
    std::vector<double> out;
    for (const Json& e : v) {
        if (!e.is_number())
            throw std::invalid_argument(where + ": \"" + key + "\" must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

namespace {

Vec vec_of(const std::vector<double>& xs, const std::string& where, int n) {
    if (static_cast<int>(xs.size()) != n)
        throw std::invalid_argument(where + ": expected " + std::to_string(n) + " entries");
    Vec v = zero_vec(n);
    for (int i = 0; i < n; ++i) v[i] = xs[static_cast<size_t>(i)];
    return v;
}

Json num_array(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

Vec json_vec_or(const Json& j, const std::string& where, const char* key, const Vec& def) {
    if (!j.contains(key)) return def;
    return vec_of(json_num_array(j, where, key), where + std::string(".") + key, def.n);
}

void require_keys(const Json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument(where + ": unknown key \"" + item.key() + "\"");
    }
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Json::parse(in);
}

void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

Anisotropy anisotropy_from_json(const Json& j) {
    require_keys(j, "anisotropy", {"b", "s"});
    std::vector<double> b = json_num_array(j, "anisotropy", "b");
    return make_anisotropy(b, json_num(j, "anisotropy", "s"));
}

Json anisotropy_to_json(const Anisotropy& a) {
    Json j;
    Json b = Json::array();
    for (int i = 0; i < a.n; ++i) b.push_back(a.bi(i));
    j["b"] = b;
    j["s"] = a.s;
    j["c"] = a.c;
    j["q_max_s"] = a.q_max_s;
    j["q_min_s"] = a.q_min_s;
    return j;
}

QuadratureScheme quadrature_from_json(const Json& j) {
    require_keys(j, "quadrature", {"r_in", "r_out", "radial_order", "angular_order", "seed"});
    QuadratureScheme q;
    q.r_in = json_num_or(j, "quadrature", "r_in", q.r_in);
    q.r_out = json_num_or(j, "quadrature", "r_out", q.r_out);
    q.radial_order = static_cast<int>(json_num_or(j, "quadrature", "radial_order", q.radial_order));
    q.angular_order = static_cast<int>(json_num_or(j, "quadrature", "angular_order", q.angular_order));
    if (j.contains("seed")) q.seed = j.at("seed").get<uint64_t>();
    return q;
}

Json quadrature_to_json(const QuadratureScheme& q) {
    Json j;
    j["r_in"] = q.r_in;
    j["r_out"] = q.r_out;
    j["radial_order"] = q.radial_order;
    j["angular_order"] = q.angular_order;
    j["seed"] = q.seed;
    return j;
}

KernelSpec kernel_from_json(const Json& j, const Anisotropy& a) {
    require_keys(j, "kernel", {"mode", "lambda", "Lambda", "multiplier"});
    std::string mode = json_str_or(j, "kernel", "mode", "reference");
    if (mode == "reference") {
        if (j.contains("lambda") || j.contains("Lambda") || j.contains("multiplier"))
            throw std::invalid_argument("kernel: reference mode takes no bounds or multiplier");
        return reference_kernel(a);
    }
    if (mode == "truncated")
        throw std::invalid_argument("kernel: truncated kernels carry callables and have no config form");
    if (mode != "bounded")
        throw std::invalid_argument("kernel: unknown mode \"" + mode + "\"");

    double lambda = json_num(j, "kernel", "lambda");
    double Lambda = json_num(j, "kernel", "Lambda");
    Json mj = j.contains("multiplier") ? j.at("multiplier") : Json::object();
    require_keys(mj, "kernel.multiplier", {"name"});
    std::string name = json_str_or(mj, "kernel.multiplier", "name", "constant");

    double mid = 0.5 * (lambda + Lambda);
    double dev = 0.5 * (Lambda - lambda);
    std::function<double(const Vec&)> m;
    if (name == "constant") {
        m = [mid](const Vec&) { return mid; };
    } else if (name == "cosine") {
        m = [mid, dev](const Vec& y) {
            double t = 0;
            for (int i = 0; i < y.n; ++i) t += y[i];
            return mid + dev * std::cos(t);
        };
    } else {
        throw std::invalid_argument("kernel.multiplier: unknown name \"" + name + "\"");
    }
    return bounded_kernel(a, lambda, Lambda, std::move(m));
}

GridFunction grid_from_json(const Json& j, int n) {
    require_keys(j, "grid", {"lo", "hi", "nodes"});
    Vec lo = vec_of(json_num_array(j, "grid", "lo"), "grid.lo", n);
    Vec hi = vec_of(json_num_array(j, "grid", "hi"), "grid.hi", n);
    std::vector<double> nodes = json_num_array(j, "grid", "nodes");
    if (static_cast<int>(nodes.size()) != n)
        throw std::invalid_argument("grid.nodes: expected " + std::to_string(n) + " entries");
    std::array<int, kMaxDim> dims{};
    for (int i = 0; i < n; ++i) {
        double d = nodes[static_cast<size_t>(i)];
        if (d != std::floor(d) || d < 2)
            throw std::invalid_argument("grid.nodes: entries must be integers >= 2");
        dims[static_cast<size_t>(i)] = static_cast<int>(d);
    }
    return make_grid(lo, hi, dims);
}

Json grid_meta_json(const GridFunction& g) {
    Json j;
    j["lo"] = num_array(g.lo);
    j["hi"] = num_array(g.hi());
    Json nd = Json::array();
    for (int i = 0; i < g.n; ++i) nd.push_back(g.dims[static_cast<size_t>(i)]);
    j["nodes"] = nd;
    j["h"] = num_array(g.h);
    return j;
}

namespace {

std::function<double(const Vec&)> named_field(const Json& j, const std::string& name, int n) {
    if (name == "constant") {
        require_keys(j, "field", {"name", "value"});
        double v = json_num(j, "field", "value");
        return [v](const Vec&) { return v; };
    }
    if (name == "gaussian") {
        require_keys(j, "field", {"name", "width"});
        double w = json_num_or(j, "field", "width", 1.0);
        if (w <= 0) throw std::invalid_argument("field: gaussian width must be positive");
        double inv = 1.0 / (w * w);
        return [inv](const Vec& x) { return std::exp(-euclid_norm_sq(x) * inv); };
    }
    if (name == "cosine") {
        require_keys(j, "field", {"name", "freq"});
        double f = json_num_or(j, "field", "freq", 1.0);
        return [f](const Vec& x) {
            double p = 1;
            for (int i = 0; i < x.n; ++i) p *= std::cos(f * x[i]);
            return p;
        };
    }
    if (name == "halfspace") {
        require_keys(j, "field", {"name", "plus", "minus"});
        double p = json_num_or(j, "field", "plus", 1.0);
        double m = json_num_or(j, "field", "minus", 0.0);
        return [p, m](const Vec& x) { return x[0] > 0 ? p : m; };
    }
    if (name == "ball") {
        require_keys(j, "field", {"name", "radius", "inside", "outside"});
        double r = json_num_or(j, "field", "radius", 1.0);
        double in = json_num_or(j, "field", "inside", 1.0);
        double out = json_num_or(j, "field", "outside", 0.0);
        if (r <= 0) throw std::invalid_argument("field: ball radius must be positive");
        double r2 = r * r;
        return [r2, in, out](const Vec& x) { return euclid_norm_sq(x) < r2 ? in : out; };
    }
    if (name == "tent") {
        require_keys(j, "field", {"name", "radius"});
        double r = json_num_or(j, "field", "radius", 3.0);
        if (r <= 0) throw std::invalid_argument("field: tent radius must be positive");
        return [r](const Vec& x) { return std::max(0.0, 1.0 - euclid_norm(x) / r); };
    }
    (void)n;
    throw std::invalid_argument("field: unknown name \"" + name + "\"");
}

}  // namespace

std::function<double(const Vec&)> field_from_json(const Json& j, int n) {
    if (!j.is_object()) throw std::invalid_argument("field: expected a JSON object");
    if (j.contains("file")) {
        require_keys(j, "field", {"file"});
        auto g = std::make_shared<GridFunction>(load_grid(j.at("file").get<std::string>()));
        if (g->n != n) throw std::invalid_argument("field: grid file dimension mismatch");
        return [g](const Vec& x) { return g->eval(x); };
    }
    return named_field(j, json_str_or(j, "field", "name", ""), n);
}

EvaluableFunction evaluable_from_json(const Json& j, int n) {
    if (!j.is_object()) throw std::invalid_argument("field: expected a JSON object");
    EvaluableFunction u;
    if (j.contains("file")) {
        require_keys(j, "field", {"file"});
        auto g = std::make_shared<GridFunction>(load_grid(j.at("file").get<std::string>()));
        if (g->n != n) throw std::invalid_argument("field: grid file dimension mismatch");
        u.f = [g](const Vec& x) { return g->eval(x); };
        u.M = std::max(1.2 * grid_hessian_bound(*g), 1e-6);
        u.eta0 = 1.0;
        u.sup_abs = std::max({std::fabs(g->min_value()), std::fabs(g->max_value()),
                              std::fabs(g->exterior_const)});
        return u;
    }
    std::string name = json_str_or(j, "field", "name", "");
    if (name == "gaussian") {
        require_keys(j, "field", {"name", "width"});
        double w = json_num_or(j, "field", "width", 1.0);
        if (w <= 0) throw std::invalid_argument("field: gaussian width must be positive");
        u.f = named_field(j, name, n);
        u.M = 1.0 / (w * w);  // half the Hessian sup 2/w^2
        u.eta0 = 1e30;
        u.sup_abs = 1.0;
        return u;
    }
    if (name == "cosine") {
        require_keys(j, "field", {"name", "freq"});
        double f = json_num_or(j, "field", "freq", 1.0);
        u.f = named_field(j, name, n);
        u.M = 0.5 * n * f * f;
        u.eta0 = 1e30;
        u.sup_abs = 1.0;
        return u;
    }
    throw std::invalid_argument("field: \"" + name +
                                "\" has no second-difference constant; use a smooth name or a grid file");
}

}  // namespace anlg
