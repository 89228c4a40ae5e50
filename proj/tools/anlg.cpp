// Command-line front end: every pipeline of the library as a subcommand with
// JSON configs, a copied resolved config, and deterministic outputs (same
// config + seed gives byte-identical summaries for any --threads value).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "anlg/abp.hpp"
#include "anlg/barriers.hpp"
#include "anlg/io_json.hpp"
#include "anlg/regularity.hpp"
#include "anlg/solver.hpp"

namespace fs = std::filesystem;
using namespace anlg;

namespace {

// ---------------------------------------------------------------------------
// Seed splitting.  Every random stream derives from the single run seed
// through Rng::split with a fixed purpose tag; adding a stream never perturbs
// the existing ones.

enum SeedTag : uint64_t {
    kTagQuadrature = 1,
    kTagSweep = 2,      // barrier sweep point set
    kTagFrakC = 3,
    kTagRelations = 4,
    kTagVolume = 5,     // +1 per volume case
    kTagHomogeneity = 6,
    kTagHolder = 7,
    kTagGrowth = 8,
};

uint64_t stream_seed(uint64_t seed, uint64_t tag) { return Rng(seed).split(tag).state; }

// ---------------------------------------------------------------------------

struct Shared {
    Json config;
    Json section;      // subcommand block, {} when absent
    Anisotropy a;
    Json kernel_json;  // verbatim kernel block
    QuadratureScheme quad;
    uint64_t seed = 0;
    fs::path out;
    std::string command;  // section name (verify uses the kind)
};

void check_top_level(const Json& j, const std::string& section) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k == "anisotropy" || k == "kernel" || k == "quadrature" || k == "seed" ||
            k == section)
            continue;
        throw std::invalid_argument("config: key \"" + k + "\" does not belong to \"" + section +
                                    "\"");
    }
}

Shared make_shared_context(const std::string& section, const std::string& config_path,
                           const std::string& out_dir, bool seed_given, uint64_t seed_value) {
    Shared sh;
    sh.command = section;
    sh.config = load_json(config_path);
    check_top_level(sh.config, section);
    if (!sh.config.contains("anisotropy"))
        throw std::invalid_argument("config: missing \"anisotropy\"");
    sh.a = anisotropy_from_json(sh.config.at("anisotropy"));
    sh.kernel_json = sh.config.contains("kernel") ? sh.config.at("kernel") : Json::object();
    sh.quad = sh.config.contains("quadrature") ? quadrature_from_json(sh.config.at("quadrature"))
                                               : QuadratureScheme{};
    if (sh.config.contains("seed")) sh.seed = sh.config.at("seed").get<uint64_t>();
    if (seed_given) sh.seed = seed_value;
    sh.config["seed"] = sh.seed;
    if (sh.quad.seed == 0) sh.quad.seed = stream_seed(sh.seed, kTagQuadrature);
    sh.section = sh.config.contains(section) ? sh.config.at(section) : Json::object();
    sh.out = out_dir;
    fs::create_directories(sh.out);
    save_json(sh.config, (sh.out / "resolved_config.json").string());
    return sh;
}

Json base_summary(const Shared& sh, const std::string& format_tag) {
    Json s;
    s["format"] = format_tag;
    s["command"] = sh.command;
    s["seed"] = sh.seed;
    s["anisotropy"] = anisotropy_to_json(sh.a);
    return s;
}

void write_summary(const Shared& sh, const Json& s) {
    save_json(s, (sh.out / "summary.json").string());
    std::printf("[anlg] %s: wrote %s\n", sh.command.c_str(),
                (sh.out / "summary.json").string().c_str());
}

// %.17g round-trips doubles; CSV cells never need quoting.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Csv {
    std::ofstream out;
    explicit Csv(const fs::path& p) : out(p) {
        if (!out) throw std::runtime_error("cannot write " + p.string());
    }
    void header(const std::vector<std::string>& names) {
        for (size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
        out << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << fmt(vals[i]);
        out << "\n";
    }
};

std::vector<std::string> coord_columns(int n, std::initializer_list<const char*> extra) {
    std::vector<std::string> cols;
    for (int i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i));
    for (const char* e : extra) cols.emplace_back(e);
    return cols;
}

std::vector<double> coord_cells(const Vec& x, std::initializer_list<double> extra) {
    std::vector<double> cells;
    for (int i = 0; i < x.n; ++i) cells.push_back(x[i]);
    for (double e : extra) cells.push_back(e);
    return cells;
}

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

Json decay_json(const DecayReport& r) {
    Json j;
    j["exponent"] = r.exponent;
    j["residual"] = r.residual;
    j["usable"] = r.usable;
    j["pass"] = r.pass;
    j["degenerate"] = r.degenerate;
    return j;
}

void decay_csv(const fs::path& p, const DecayReport& r) {
    Csv csv(p);
    csv.header({"scale", "value"});
    for (size_t i = 0; i < r.scales.size(); ++i) csv.row({r.scales[i], r.values[i]});
}

Json holder_json(const HolderReport& r) {
    Json j;
    j["exponent"] = r.exponent;
    j["exponent_raw"] = r.exponent_raw;
    j["seminorm"] = r.seminorm;
    j["residual"] = r.residual;
    j["bins_used"] = r.bins_used;
    j["degenerate"] = r.degenerate;
    return j;
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces.

SolveReport run_interior_solve(const Shared& sh, const Json& block, const std::string& where) {
    require_keys(block, where, {"grid", "data", "tol", "max_iter", "damping"});
    if (!block.contains("grid")) throw std::invalid_argument(where + ": missing \"grid\"");
    if (!block.contains("data")) throw std::invalid_argument(where + ": missing \"data\"");
    GridFunction dom = grid_from_json(block.at("grid"), sh.a.n);
    auto g = field_from_json(block.at("data"), sh.a.n);
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    DiscreteOperator op = assemble(dom, g, k, sh.quad);
    SolveOptions so;
    so.tol = json_num_or(block, where, "tol", so.tol);
    so.max_iter = static_cast<long>(json_num_or(block, where, "max_iter",
                                                static_cast<double>(so.max_iter)));
    so.damping = json_num_or(block, where, "damping", so.damping);
    return solve(op, so);
}

/// Verify inputs come either from an ANLG binary ("u") or a fresh interior
/// solve ("solve"); exactly one must be present.
GridFunction verify_input(const Shared& sh, const Json& sec, const std::string& where,
                          Json& provenance) {
    bool has_file = sec.contains("u");
    bool has_solve = sec.contains("solve");
    if (has_file == has_solve)
        throw std::invalid_argument(where + ": provide exactly one of \"u\" and \"solve\"");
    if (has_file) {
        const Json& uj = sec.at("u");
        require_keys(uj, where + ".u", {"file"});
        GridFunction u = load_grid(json_str(uj, where + ".u", "file"));
        if (u.n != sh.a.n) throw std::invalid_argument(where + ": grid dimension mismatch");
        provenance["input"] = "file";
        return u;
    }
    SolveReport rep = run_interior_solve(sh, sec.at("solve"), where + ".solve");
    if (!rep.converged) throw std::runtime_error(where + ": interior solve did not converge");
    provenance["input"] = "solve";
    provenance["solve_iterations"] = rep.iterations;
    provenance["solve_residual"] = rep.residual;
    return rep.solution;
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_eval(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "eval", {"function", "points", "operator", "lambda", "Lambda",
                               "target_error"});
    if (!sec.contains("function")) throw std::invalid_argument("eval: missing \"function\"");
    EvaluableFunction u = evaluable_from_json(sec.at("function"), sh.a.n);
    if (!sec.contains("points") || !sec.at("points").is_array() || sec.at("points").empty())
        throw std::invalid_argument("eval: \"points\" must be a nonempty array");
    std::vector<Vec> pts;
    for (const Json& pj : sec.at("points")) {
        if (!pj.is_array() || static_cast<int>(pj.size()) != sh.a.n)
            throw std::invalid_argument("eval: each point needs " + std::to_string(sh.a.n) +
                                        " coordinates");
        Vec x = zero_vec(sh.a.n);
        for (int i = 0; i < sh.a.n; ++i) x[i] = pj.at(static_cast<size_t>(i)).get<double>();
        pts.push_back(x);
    }
    OperatorOptions oo;
    oo.quad = sh.quad;
    oo.target_error = json_num_or(sec, "eval", "target_error", 1e-7);
    std::string which = json_str_or(sec, "eval", "operator", "L");

    Json s = base_summary(sh, "anlg-eval-summary/1");
    s["operator"] = which;
    Json rows = Json::array();
    Csv csv(sh.out / "eval.csv");
    if (which == "L") {
        KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
        csv.header(coord_columns(sh.a.n, {"value", "err_quad", "err_near", "err_far"}));
        for (const Vec& x : pts) {
            OperatorValue v = evaluate_L(k, u, x, oo);
            csv.row(coord_cells(x, {v.value, v.err_quad, v.err_near, v.err_far}));
            Json r;
            r["x"] = vec_json(x);
            r["value"] = v.value;
            r["error"] = v.total_err();
            rows.push_back(r);
        }
    } else if (which == "pucci") {
        double lambda = json_num(sec, "eval", "lambda");
        double Lambda = json_num(sec, "eval", "Lambda");
        s["lambda"] = lambda;
        s["Lambda"] = Lambda;
        csv.header(coord_columns(sh.a.n, {"plus", "plus_err", "minus", "minus_err"}));
        for (const Vec& x : pts) {
            PucciPair p = evaluate_pucci(sh.a, lambda, Lambda, u, x, oo);
            csv.row(coord_cells(
                x, {p.plus.value, p.plus.total_err(), p.minus.value, p.minus.total_err()}));
            Json r;
            r["x"] = vec_json(x);
            r["plus"] = p.plus.value;
            r["plus_error"] = p.plus.total_err();
            r["minus"] = p.minus.value;
            r["minus_error"] = p.minus.total_err();
            rows.push_back(r);
        }
    } else {
        throw std::invalid_argument("eval: operator must be \"L\" or \"pucci\"");
    }
    s["results"] = rows;
    s["files"]["table"] = "eval.csv";
    write_summary(sh, s);
    return 0;
}

int run_barrier(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "barrier", {"eta_points", "target_error", "power", "bump"});
    Json s = base_summary(sh, "anlg-barrier-summary/1");

    // Sweep of the operator applied to the localization barrier over B_{3/4}.
    int npts = static_cast<int>(json_num_or(sec, "barrier", "eta_points", 50));
    if (npts < 1) throw std::invalid_argument("barrier: eta_points must be positive");
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    EvaluableFunction eta = eta_barrier(sh.a.n);
    OperatorOptions oo;
    oo.quad = sh.quad;
    oo.target_error = json_num_or(sec, "barrier", "target_error", 1e-7);
    LatticeSampler lat(sh.a.n, stream_seed(sh.seed, kTagSweep));
    std::vector<Vec> pts;
    pts.push_back(zero_vec(sh.a.n));
    while (static_cast<int>(pts.size()) < npts) {
        Vec t = lat.next();
        Vec x = zero_vec(sh.a.n);
        for (int i = 0; i < sh.a.n; ++i) x[i] = (2.0 * t[i] - 1.0) * 0.75;
        if (euclid_norm(x) < 0.75) pts.push_back(x);
    }
    std::vector<OperatorValue> vals(pts.size());
    parallel_for_each(pts.size(), [&](size_t i) { vals[i] = evaluate_L(k, eta, pts[i], oo); });
    Csv csv(sh.out / "eta.csv");
    csv.header(coord_columns(sh.a.n, {"value", "err_total"}));
    double sup = 0, err_at_sup = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        csv.row(coord_cells(pts[i], {vals[i].value, vals[i].total_err()}));
        if (std::fabs(vals[i].value) > sup) {
            sup = std::fabs(vals[i].value);
            err_at_sup = vals[i].total_err();
        }
    }
    s["eta"]["points"] = static_cast<int>(pts.size());
    s["eta"]["sup_abs"] = sup;
    s["eta"]["err_at_sup"] = err_at_sup;
    s["files"]["eta_table"] = "eta.csv";

    if (sec.contains("power")) {
        const Json& pw = sec.at("power");
        require_keys(pw, "barrier.power",
                     {"lambda", "Lambda", "R", "radial_pts", "angular_pts", "p0"});
        PowerBarrierReport pr =
            find_p(sh.a, json_num(pw, "barrier.power", "lambda"),
                   json_num(pw, "barrier.power", "Lambda"), json_num(pw, "barrier.power", "R"),
                   static_cast<int>(json_num_or(pw, "barrier.power", "radial_pts", 5)),
                   static_cast<int>(json_num_or(pw, "barrier.power", "angular_pts", 8)),
                   json_num_or(pw, "barrier.power", "p0", 2.0));
        s["power"]["found"] = pr.found;
        s["power"]["p"] = pr.p;
        s["power"]["kappa"] = pr.kappa;
        s["power"]["min_minus"] = pr.min_minus;
        s["power"]["iterations"] = pr.iterations;
    }
    if (sec.contains("bump")) {
        const Json& bj = sec.at("bump");
        require_keys(bj, "barrier.bump", {"p"});
        BumpPsi psi = make_bump_psi(sh.a, json_num(bj, "barrier.bump", "p"));
        s["bump"]["feasible"] = psi.feasible;
        s["bump"]["p"] = psi.p;
        s["bump"]["c_tilde"] = psi.c_tilde;
        s["bump"]["cap_A"] = psi.cap_A;
        s["bump"]["corner_z"] = psi.corner_z;
    }
    write_summary(sh, s);
    return 0;
}

int run_silvestre(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "silvestre", {"delta", "grid", "bathtub_resolution", "iteration_cap"});
    double delta = json_num_or(sec, "silvestre", "delta", 0.5 * unit_ball_volume(sh.a.n));
    SilvestreCertificate cert = find_kappa_tau(
        sh.a, delta, static_cast<int>(json_num_or(sec, "silvestre", "grid", 7)),
        static_cast<int>(json_num_or(sec, "silvestre", "bathtub_resolution", 201)),
        static_cast<int>(json_num_or(sec, "silvestre", "iteration_cap", 60)));
    Json s = base_summary(sh, "anlg-silvestre-summary/1");
    s["delta"] = delta;
    s["certified"] = cert.certified;
    s["iterations"] = cert.iterations;
    s["kappa"] = cert.last.kappa;
    s["tau"] = cert.last.tau;
    s["lhs"] = cert.last.lhs;
    s["rhs"] = cert.last.rhs;
    s["margin"] = cert.last.margin;
    s["eta_sup"] = cert.last.eta_sup;
    s["tail_value"] = cert.last.tail_value;
    s["grid"] = cert.last.grid;
    s["bathtub_resolution"] = cert.last.bathtub_resolution;
    write_summary(sh, s);
    return cert.certified ? 0 : 2;
}

int run_abp(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "abp", {"instance", "options"});
    if (!sec.contains("instance")) throw std::invalid_argument("abp: missing \"instance\"");
    const Json& inst = sec.at("instance");
    GridFunction u, f;
    if (inst.contains("u_file")) {
        require_keys(inst, "abp.instance", {"u_file", "f_file"});
        u = load_grid(json_str(inst, "abp.instance", "u_file"));
        f = load_grid(json_str(inst, "abp.instance", "f_file"));
    } else {
        require_keys(inst, "abp.instance", {"name", "nodes", "f_value"});
        std::string name = json_str(inst, "abp.instance", "name");
        double fv = json_num_or(inst, "abp.instance", "f_value", 30.0);
        if (name == "spike") {
            if (sh.a.n != 1) throw std::invalid_argument("abp: the spike instance is 1-d");
            int nodes = static_cast<int>(json_num_or(inst, "abp.instance", "nodes", 121));
            if (nodes % 2 == 0)
                throw std::invalid_argument("abp: spike needs an odd node count (origin node)");
            u = make_cube_grid(1, 3.0, nodes);
            fill_grid(u, [](const Vec& x) { return x[0] == 0.0 ? 1.0 : 0.0; });
        } else if (name == "cap") {
            if (sh.a.n > 2) throw std::invalid_argument("abp: the cap instance needs n <= 2");
            int nodes = static_cast<int>(json_num_or(inst, "abp.instance", "nodes", 61));
            u = make_cube_grid(sh.a.n, 3.0, nodes);
            fill_grid(u, [](const Vec& x) { return 1.0 - euclid_norm_sq(x); });
        } else {
            throw std::invalid_argument("abp.instance: unknown name \"" + name + "\"");
        }
        f = u;
        fill_grid(f, [fv](const Vec&) { return fv; });
    }
    if (u.n != sh.a.n) throw std::invalid_argument("abp: grid dimension mismatch");

    FamilyOptions fo;
    fo.op.quad = sh.quad;
    if (sec.contains("options")) {
        const Json& oj = sec.at("options");
        require_keys(oj, "abp.options",
                     {"rho0", "eps1", "c5", "c6", "varsigma", "max_depth",
                      "certify_supersolution", "supersolution_tol", "supersolution_cap"});
        fo.rho0 = json_num_or(oj, "abp.options", "rho0", fo.rho0);
        fo.eps1 = json_num_or(oj, "abp.options", "eps1", fo.eps1);
        fo.c5 = json_num_or(oj, "abp.options", "c5", fo.c5);
        fo.c6 = json_num_or(oj, "abp.options", "c6", fo.c6);
        fo.varsigma = json_num_or(oj, "abp.options", "varsigma", fo.varsigma);
        fo.max_depth = static_cast<int>(json_num_or(oj, "abp.options", "max_depth", fo.max_depth));
        fo.certify_supersolution =
            json_bool_or(oj, "abp.options", "certify_supersolution", fo.certify_supersolution);
        fo.supersolution_tol =
            json_num_or(oj, "abp.options", "supersolution_tol", fo.supersolution_tol);
        fo.supersolution_cap = static_cast<int>(
            json_num_or(oj, "abp.options", "supersolution_cap", fo.supersolution_cap));
    }
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    RectangleFamily fam = abp_rectangle_family(u, f, k, fo);
    VolumeConsistency vc = abp_volume_consistency(fam, u, sh.a);

    Json fj;
    fj["format"] = "anlg-abp-family/1";
    fj["constants"]["r0"] = fam.r0;
    fj["constants"]["l"] = fam.l;
    fj["constants"]["frak_c"] = fam.frak_c;
    fj["constants"]["c5"] = fam.c5;
    fj["constants"]["c6"] = fam.c6;
    fj["constants"]["varsigma"] = fam.varsigma;
    fj["constants"]["c_dilate"] = fam.c_dilate;
    fj["terminated"] = fam.terminated;
    fj["depth"] = fam.depth;
    fj["sup_u"] = fam.sup_u;
    fj["supersolution_margin"] = fam.supersolution_margin;
    Json rects = Json::array();
    for (const FamilyRect& fr : fam.rects) {
        Json r;
        r["center"] = vec_json(fr.rect.center);
        r["half"] = vec_json(fr.rect.half);
        r["companion_half"] = vec_json(fr.companion.half);
        r["generation"] = fr.generation;
        r["diameter"] = fr.diameter;
        r["grad_image"] = fr.grad_image;
        r["max_f_plus"] = fr.max_f_plus;
        r["contact_fraction"] = fr.contact_fraction;
        r["pass5"] = fr.pass5;
        r["pass6"] = fr.pass6;
        rects.push_back(r);
    }
    fj["rects"] = rects;
    fj["offenders"] = static_cast<int>(fam.offenders.size());
    save_json(fj, (sh.out / "family.json").string());

    Csv csv(sh.out / "envelope.csv");
    csv.header(coord_columns(u.n, {"u", "gamma", "contact"}));
    for (size_t fl = 0; fl < u.size(); ++fl)
        csv.row(coord_cells(u.node(fl), {u.values[fl], fam.envelope.gamma.values[fl],
                                         static_cast<double>(fam.envelope.contact[fl])}));

    bool ok = fam.terminated && fam.disjoint && fam.covers_contact &&
              fam.closures_meet_contact && fam.diameter_bound;
    Json s = base_summary(sh, "anlg-abp-summary/1");
    s["rects"] = static_cast<int>(fam.rects.size());
    s["terminated"] = fam.terminated;
    s["depth"] = fam.depth;
    s["disjoint"] = fam.disjoint;
    s["covers_contact"] = fam.covers_contact;
    s["closures_meet_contact"] = fam.closures_meet_contact;
    s["diameter_bound"] = fam.diameter_bound;
    s["supersolution_margin"] = fam.supersolution_margin;
    s["volume"]["sup_u"] = vc.sup_u;
    s["volume"]["gradient_hull"] = vc.gradient_hull;
    s["volume"]["plane_ball"] = vc.plane_ball;
    s["volume"]["union_volume"] = vc.union_volume;
    s["volume"]["max_overlap"] = vc.max_overlap;
    s["volume"]["chain_constant"] = vc.chain_constant;
    s["volume"]["gradient_bound_ok"] = vc.gradient_bound_ok;
    s["volume"]["chain_ok"] = vc.chain_ok;
    s["files"]["family"] = "family.json";
    s["files"]["envelope_table"] = "envelope.csv";
    write_summary(sh, s);
    return ok ? 0 : 2;
}

int run_solve(Shared& sh) {
    SolveReport rep = run_interior_solve(sh, sh.section, "solve");
    GridFunction flat = rep.solution;
    flat.exterior_fn = nullptr;  // callables are not serializable
    flat.exterior_const = 0;
    save_grid(flat, (sh.out / "solution.anlg").string());

    // Center-line slices along each axis (for n = 1 this is the whole line).
    const GridFunction& u = rep.solution;
    for (int axis = 0; axis < u.n; ++axis) {
        Csv csv(sh.out / ("slice_axis" + std::to_string(axis) + ".csv"));
        csv.header(coord_columns(u.n, {"value"}));
        std::array<int, kMaxDim> idx{};
        for (int i = 0; i < u.n; ++i) idx[static_cast<size_t>(i)] = u.dims[static_cast<size_t>(i)] / 2;
        for (int j = 0; j < u.dims[static_cast<size_t>(axis)]; ++j) {
            idx[static_cast<size_t>(axis)] = j;
            csv.row(coord_cells(u.node(idx), {u.at(idx)}));
        }
    }

    Json s = base_summary(sh, "anlg-solve-summary/1");
    s["grid"] = grid_meta_json(u);
    s["converged"] = rep.converged;
    s["iterations"] = rep.iterations;
    s["residual"] = rep.residual;
    s["damping_used"] = rep.damping_used;
    s["min"] = rep.min_value;
    s["max"] = rep.max_value;
    const Json& dj = sh.section.at("data");
    if (dj.contains("name") && dj.at("name") == "constant") {
        double c = json_num(dj, "solve.data", "value");
        double gap = 0;
        for (double v : u.values) gap = std::max(gap, std::fabs(v - c));
        s["constant_gap"] = gap;
    }
    s["files"]["solution"] = "solution.anlg";
    for (int axis = 0; axis < u.n; ++axis)
        s["files"]["slice_axis" + std::to_string(axis)] =
            "slice_axis" + std::to_string(axis) + ".csv";
    write_summary(sh, s);
    return rep.converged ? 0 : 2;
}

int run_geometry(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "geometry", {"samples", "frak_c_samples", "volume_samples",
                                   "homogeneity_samples"});
    uint64_t samples = static_cast<uint64_t>(json_num_or(sec, "geometry", "samples", 100000));
    uint64_t csamples =
        static_cast<uint64_t>(json_num_or(sec, "geometry", "frak_c_samples",
                                          static_cast<double>(samples)));
    uint64_t vsamples =
        static_cast<uint64_t>(json_num_or(sec, "geometry", "volume_samples",
                                          static_cast<double>(samples)));
    int hsamples =
        static_cast<int>(json_num_or(sec, "geometry", "homogeneity_samples", 10000));

    int C = frak_C(sh.a, csamples, stream_seed(sh.seed, kTagFrakC));
    std::vector<RelationCheck> rels =
        fundamental_geometry_checks(sh.a, C, samples, stream_seed(sh.seed, kTagRelations));
    Csv csv(sh.out / "relations.csv");
    csv.out << "name,tested,violations\n";
    uint64_t total_violations = 0;
    Json rj = Json::array();
    for (const RelationCheck& rc : rels) {
        csv.out << rc.name << "," << rc.report.tested << "," << rc.report.violations << "\n";
        total_violations += rc.report.violations;
        Json r;
        r["name"] = rc.name;
        r["tested"] = rc.report.tested;
        r["violations"] = rc.report.violations;
        rj.push_back(r);
    }

    // Monte Carlo volume vs the closed forms for the three region families.
    struct VolCase {
        const char* name;
        Region reg;
    };
    Vec o = zero_vec(sh.a.n);
    std::vector<VolCase> vols = {{"E(r=0.8,l=1)", ellipsoid_E(o, 0.8, 1.0)},
                                 {"Emax(r=0.7,l=1.2)", ellipsoid_Emax(o, 0.7, 1.2)},
                                 {"Theta(r=1.3)", theta_ball(o, 1.3)}};
    Json vj = Json::array();
    bool volumes_ok = true;
    for (size_t i = 0; i < vols.size(); ++i) {
        double exact = volume(sh.a, vols[i].reg);
        VolumeEstimate est =
            mc_volume(sh.a, vols[i].reg, vsamples, stream_seed(sh.seed, kTagVolume + i));
        double gap = std::fabs(est.value - exact);
        bool ok = gap <= std::max(5.0 * est.std_error, 1e-3 * exact);
        volumes_ok = volumes_ok && ok;
        Json v;
        v["name"] = vols[i].name;
        v["exact"] = exact;
        v["estimate"] = est.value;
        v["std_error"] = est.std_error;
        v["ok"] = ok;
        vj.push_back(v);
    }

    // Scaling homogeneity: |T_r y|_b = r |y|_b and det T_r = r^c.
    Rng rng(stream_seed(sh.seed, kTagHomogeneity));
    double norm_err = 0, det_err = 0;
    for (int t = 0; t < hsamples; ++t) {
        double r = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        Vec y = zero_vec(sh.a.n);
        for (int i = 0; i < sh.a.n; ++i) y[i] = rng.uniform(-1.0, 1.0);
        if (euclid_norm(y) < 1e-12) continue;
        ScalingMap m = t_beta(r);
        double lhs = aniso_norm(sh.a, map_apply(sh.a, m, y));
        double rhs = r * aniso_norm(sh.a, y);
        norm_err = std::max(norm_err, std::fabs(lhs - rhs) / rhs);
        det_err = std::max(det_err,
                           std::fabs(map_det(sh.a, m) - std::pow(r, sh.a.c)) / std::pow(r, sh.a.c));
    }
    bool homogeneity_ok = norm_err < 1e-11 && det_err < 1e-11;

    Json s = base_summary(sh, "anlg-geometry-summary/1");
    s["frak_c"] = C;
    s["relations"] = rj;
    s["total_violations"] = total_violations;
    s["volumes"] = vj;
    s["homogeneity"]["samples"] = hsamples;
    s["homogeneity"]["max_norm_rel_err"] = norm_err;
    s["homogeneity"]["max_det_rel_err"] = det_err;
    s["homogeneity"]["ok"] = homogeneity_ok;
    s["files"]["relations_table"] = "relations.csv";
    write_summary(sh, s);
    return (total_violations == 0 && volumes_ok && homogeneity_ok) ? 0 : 2;
}

// ---------------------------------------------------------------------------
// verify kinds.

int run_degiorgi(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "degiorgi", {"u", "solve", "x0", "r0", "num_scales", "residual_tol"});
    Json s = base_summary(sh, "anlg-degiorgi-summary/1");
    GridFunction u = verify_input(sh, sec, "degiorgi", s);
    DeGiorgiOptions opt;
    opt.num_scales = static_cast<int>(json_num_or(sec, "degiorgi", "num_scales", opt.num_scales));
    opt.residual_tol = json_num_or(sec, "degiorgi", "residual_tol", opt.residual_tol);
    Vec x0 = json_vec_or(sec, "degiorgi", "x0", zero_vec(sh.a.n));
    double r0 = json_num_or(sec, "degiorgi", "r0", 1.0);
    DecayReport r = de_giorgi_iteration(u, sh.a, x0, r0, opt);
    decay_csv(sh.out / "oscillation.csv", r);
    s["report"] = decay_json(r);
    s["files"]["table"] = "oscillation.csv";
    write_summary(sh, s);
    return 0;
}

int run_growth(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "growth", {"u", "solve", "delta", "mu", "tau", "subsolution_tol",
                                 "subsolution_cap", "tail_samples", "tail_radius"});
    Json s = base_summary(sh, "anlg-growth-summary/1");
    GridFunction u = verify_input(sh, sec, "growth", s);
    double delta = json_num(sec, "growth", "delta");
    double mu = json_num(sec, "growth", "mu");
    double tau;
    if (sec.contains("tau")) {
        tau = json_num(sec, "growth", "tau");
        s["tau_source"] = "config";
    } else {
        SilvestreCertificate cert = find_kappa_tau(sh.a, 0.5 * unit_ball_volume(sh.a.n));
        if (!cert.certified)
            throw std::runtime_error("growth: no certified tail exponent; pass \"tau\"");
        tau = cert.last.tau;
        s["tau_source"] = "certificate";
    }
    GrowthOptions opt;
    opt.subsolution_tol = json_num_or(sec, "growth", "subsolution_tol", opt.subsolution_tol);
    opt.subsolution_cap =
        static_cast<int>(json_num_or(sec, "growth", "subsolution_cap", opt.subsolution_cap));
    opt.tail_samples =
        static_cast<int>(json_num_or(sec, "growth", "tail_samples", opt.tail_samples));
    opt.tail_radius = json_num_or(sec, "growth", "tail_radius", opt.tail_radius);
    opt.seed = stream_seed(sh.seed, kTagGrowth);
    opt.op.quad = sh.quad;
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    GrowthReport r = growth_lemma_check(u, k, delta, mu, tau, opt);
    s["tau"] = tau;
    s["delta"] = delta;
    s["mu"] = mu;
    Json margins = Json::array();
    for (double m : r.hypothesis_margin) margins.push_back(m);
    s["hypothesis_margin"] = margins;
    s["failed_hypothesis"] = r.failed_hypothesis;
    s["hypotheses_ok"] = r.hypotheses_ok;
    s["zero_measure"] = r.zero_measure;
    s["max_half"] = r.max_half;
    s["margin"] = r.margin;
    s["holds"] = r.holds;
    write_summary(sh, s);
    return 0;
}

int run_harnack(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "harnack", {"data", "nodes", "half", "tol", "max_iter"});
    if (!sec.contains("data")) throw std::invalid_argument("harnack: missing \"data\"");
    auto g = field_from_json(sec.at("data"), sh.a.n);
    HarnackOptions opt;
    opt.nodes = static_cast<int>(json_num_or(sec, "harnack", "nodes", opt.nodes));
    opt.half = json_num_or(sec, "harnack", "half", opt.half);
    opt.quad = sh.quad;
    opt.solve.tol = json_num_or(sec, "harnack", "tol", opt.solve.tol);
    opt.solve.max_iter = static_cast<long>(
        json_num_or(sec, "harnack", "max_iter", static_cast<double>(opt.solve.max_iter)));
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    HarnackReport r = harnack_ratio(g, k, opt);
    Json s = base_summary(sh, "anlg-harnack-summary/1");
    s["ratio"] = r.ratio;
    s["normalized"] = r.normalized;
    s["sup_half"] = r.sup_half;
    s["inf_half"] = r.inf_half;
    s["center"] = r.center;
    s["residual"] = r.residual;
    s["inf_clamped"] = r.inf_clamped;
    s["converged"] = r.converged;
    write_summary(sh, s);
    return r.converged ? 0 : 2;
}

int run_pointwise(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "pointwise", {"u", "solve", "thresholds"});
    Json s = base_summary(sh, "anlg-pointwise-summary/1");
    GridFunction u = verify_input(sh, sec, "pointwise", s);
    std::vector<double> thresholds = json_num_array(sec, "pointwise", "thresholds");
    DecayReport r = point_estimate_decay(u, thresholds);
    decay_csv(sh.out / "distribution.csv", r);
    s["report"] = decay_json(r);
    s["files"]["table"] = "distribution.csv";
    write_summary(sh, s);
    return 0;
}

int run_liouville(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "liouville", {"radii", "nodes", "half", "tol", "max_iter"});
    std::vector<double> radii = json_num_array(sec, "liouville", "radii");
    LiouvilleOptions opt;
    opt.nodes = static_cast<int>(json_num_or(sec, "liouville", "nodes", opt.nodes));
    opt.half = json_num_or(sec, "liouville", "half", opt.half);
    opt.quad = sh.quad;
    opt.solve.tol = json_num_or(sec, "liouville", "tol", opt.solve.tol);
    opt.solve.max_iter = static_cast<long>(
        json_num_or(sec, "liouville", "max_iter", static_cast<double>(opt.solve.max_iter)));
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);
    DecayReport r = liouville_probe(k, radii, opt);
    decay_csv(sh.out / "oscillation.csv", r);
    Json s = base_summary(sh, "anlg-liouville-summary/1");
    s["report"] = decay_json(r);
    s["files"]["table"] = "oscillation.csv";
    write_summary(sh, s);
    return 0;
}

HolderOptions holder_options(const Shared& sh, const Json& sec, const std::string& where) {
    HolderOptions opt;
    opt.pairs = static_cast<size_t>(json_num_or(sec, where, "pairs",
                                                static_cast<double>(opt.pairs)));
    opt.bins = static_cast<int>(json_num_or(sec, where, "bins", opt.bins));
    opt.quantile = json_num_or(sec, where, "quantile", opt.quantile);
    opt.cap = json_num_or(sec, where, "cap", opt.cap);
    opt.seed = stream_seed(sh.seed, kTagHolder);
    return opt;
}

HolderMetric metric_of(const Json& sec, const std::string& where, const char* def) {
    std::string m = json_str_or(sec, where, "metric", def);
    if (m == "aniso") return HolderMetric::Aniso;
    if (m == "euclid") return HolderMetric::Euclid;
    throw std::invalid_argument(where + ": metric must be \"aniso\" or \"euclid\"");
}

int run_holder(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "holder", {"u", "solve", "center", "radius", "metric", "pairs", "bins",
                                 "quantile", "cap"});
    Json s = base_summary(sh, "anlg-holder-summary/1");
    GridFunction u = verify_input(sh, sec, "holder", s);
    Vec center = json_vec_or(sec, "holder", "center", zero_vec(sh.a.n));
    double radius = json_num(sec, "holder", "radius");
    HolderMetric metric = metric_of(sec, "holder", "aniso");
    HolderReport r = holder_fit(u, sh.a, center, radius, metric, holder_options(sh, sec, "holder"));
    s["metric"] = metric == HolderMetric::Aniso ? "aniso" : "euclid";
    s["report"] = holder_json(r);
    write_summary(sh, s);
    return 0;
}

int run_c1gamma(Shared& sh) {
    const Json& sec = sh.section;
    require_keys(sec, "c1gamma", {"u", "solve", "tau0", "h", "center", "radius", "metric",
                                  "pairs", "bins", "quantile", "cap"});
    double tau0 = json_num_or(sec, "c1gamma", "tau0", 1.0);
    std::vector<double> hs =
        sec.contains("h") ? json_num_array(sec, "c1gamma", "h")
                          : std::vector<double>{0.05, 0.1, 0.2};
    KernelSpec k = kernel_from_json(sh.kernel_json, sh.a);

    Csv csv(sh.out / "translation_modulus.csv");
    csv.header({"axis", "h", "value", "quadrature", "tail_bound", "blocks"});
    Json moduli = Json::array();
    bool finite = true;
    for (double h : hs) {
        if (!(h > 0 && h < 0.5 * tau0))
            throw std::invalid_argument("c1gamma: each h needs 0 < h < tau0/2");
        double worst = 0;
        for (int axis = 0; axis < sh.a.n; ++axis) {
            Vec step = zero_vec(sh.a.n);
            step[axis] = h;
            TranslationModulus tm = translation_modulus(k, step, tau0);
            csv.row({static_cast<double>(axis), h, tm.value, tm.quadrature, tm.tail_bound,
                     static_cast<double>(tm.blocks)});
            worst = std::max(worst, tm.value);
            finite = finite && std::isfinite(tm.value);
        }
        Json m;
        m["h"] = h;
        m["max_over_axes"] = worst;
        moduli.push_back(m);
    }

    Json s = base_summary(sh, "anlg-c1gamma-summary/1");
    GridFunction u = verify_input(sh, sec, "c1gamma", s);
    Vec center = json_vec_or(sec, "c1gamma", "center", zero_vec(sh.a.n));
    double radius = json_num(sec, "c1gamma", "radius");
    HolderMetric metric = metric_of(sec, "c1gamma", "euclid");
    HolderReport r =
        gradient_holder_fit(u, sh.a, center, radius, metric, holder_options(sh, sec, "c1gamma"));
    s["tau0"] = tau0;
    s["translation_modulus"] = moduli;
    s["modulus_finite"] = finite;
    s["metric"] = metric == HolderMetric::Aniso ? "aniso" : "euclid";
    s["gradient_fit"] = holder_json(r);
    s["files"]["modulus_table"] = "translation_modulus.csv";
    write_summary(sh, s);
    return finite ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic nonlocal operator toolbox"};
    app.require_subcommand(1);

    std::string config_path, out_dir, verify_kind;
    int threads = 0;
    uint64_t seed_value = 0;

    struct SubDef {
        const char* name;
        const char* help;
    };
    const SubDef defs[] = {
        {"eval", "evaluate the operator or its extremal envelope on a point list"},
        {"barrier", "barrier sweep, power barrier search, bump calibration"},
        {"silvestre", "smallness certificate search for (kappa, tau)"},
        {"abp", "concave envelope and certified rectangle family"},
        {"solve", "monotone interior solve with exterior data"},
        {"verify", "regularity measurements on solved or provided data"},
        {"geometry", "inclusion certificates, dilation constant, volume checks"},
    };
    std::vector<CLI::App*> subs;
    for (const SubDef& d : defs) {
        CLI::App* s = app.add_subcommand(d.name, d.help);
        s->add_option("--config", config_path, "JSON run config")->required();
        s->add_option("--out", out_dir, "output directory")->required();
        s->add_option("--threads", threads, "worker thread cap (0 = hardware)");
        s->add_option("--seed", seed_value, "override the config seed");
        subs.push_back(s);
    }
    CLI::App* verify = subs[5];
    verify->add_option("kind", verify_kind, "measurement to run")
        ->required()
        ->check(CLI::IsMember({"degiorgi", "growth", "harnack", "pointwise", "liouville",
                               "holder", "c1gamma"}));

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    std::string section = sub->get_name() == "verify" ? verify_kind : sub->get_name();

    try {
        if (threads > 0) set_thread_budget(threads);
        Shared sh = make_shared_context(section, config_path, out_dir,
                                        sub->count("--seed") > 0, seed_value);
        if (section == "eval") return run_eval(sh);
        if (section == "barrier") return run_barrier(sh);
        if (section == "silvestre") return run_silvestre(sh);
        if (section == "abp") return run_abp(sh);
        if (section == "solve") return run_solve(sh);
        if (section == "geometry") return run_geometry(sh);
        if (section == "degiorgi") return run_degiorgi(sh);
        if (section == "growth") return run_growth(sh);
        if (section == "harnack") return run_harnack(sh);
        if (section == "pointwise") return run_pointwise(sh);
        if (section == "liouville") return run_liouville(sh);
        if (section == "holder") return run_holder(sh);
        if (section == "c1gamma") return run_c1gamma(sh);
        throw std::logic_error("unhandled subcommand " + section);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
