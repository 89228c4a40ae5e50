#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "anlg/io_json.hpp"

using namespace anlg;

TEST_CASE("require_keys accepts listed keys and names the offender") {
    Json j = Json::parse(R"({"b": [2,2], "s": 1.0})");
    CHECK_NOTHROW(require_keys(j, "here", {"b", "s"}));
    Json bad = Json::parse(R"({"b": [2,2], "ss": 1.0})");
    CHECK_THROWS_WITH_AS(require_keys(bad, "here", {"b", "s"}),
                         "here: unknown key \"ss\"", std::invalid_argument);
    CHECK_THROWS_AS(require_keys(Json::parse("[1,2]"), "here", {"b"}), std::invalid_argument);
}

TEST_CASE("anisotropy parsing and serialization") {
    Anisotropy a = anisotropy_from_json(Json::parse(R"({"b": [1, 2], "s": 0.8})"));
    CHECK(a.n == 2);
    CHECK(a.bi(0) == 1.0);
    CHECK(a.s == 0.8);
    CHECK(a.c == doctest::Approx(3.0));

    Json j = anisotropy_to_json(a);
    CHECK(j["b"][1] == 2.0);
    CHECK(j["q_max_s"].get<double>() == doctest::Approx(2.0 - 0.8));

    CHECK_THROWS_AS(anisotropy_from_json(Json::parse(R"({"b": [2,2]})")), std::invalid_argument);
    CHECK_THROWS_AS(anisotropy_from_json(Json::parse(R"({"b": [2,2], "s": -1})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(anisotropy_from_json(Json::parse(R"({"b": [2,2], "s": 1, "x": 0})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(anisotropy_from_json(Json::parse(R"({"b": "two", "s": 1})")),
                    std::invalid_argument);
}

TEST_CASE("quadrature defaults, round trip, and large seeds") {
    QuadratureScheme q = quadrature_from_json(Json::parse("{}"));
    CHECK(q.r_in == 0.0);
    CHECK(q.radial_order == 8);

    uint64_t big = (1ULL << 63) + 5;
    Json j = Json::parse(R"({"r_in": 0.25, "r_out": 100.0, "radial_order": 12,
                             "angular_order": 6, "seed": 0})");
    j["seed"] = big;
    q = quadrature_from_json(j);
    CHECK(q.r_in == 0.25);
    CHECK(q.seed == big);
    Json back = quadrature_to_json(q);
    CHECK(back["seed"].get<uint64_t>() == big);
    CHECK(quadrature_from_json(back).angular_order == 6);

    CHECK_THROWS_AS(quadrature_from_json(Json::parse(R"({"rin": 0.1})")), std::invalid_argument);
}

TEST_CASE("kernel parsing: reference, bounded shapes, rejections") {
    Anisotropy a = make_anisotropy({1.0, 2.0}, 0.5);
    KernelSpec ref = kernel_from_json(Json::parse(R"({"mode": "reference"})"), a);
    CHECK(ref.mode == KernelMode::Reference);
    CHECK(kernel_from_json(Json::parse("{}"), a).mode == KernelMode::Reference);

    KernelSpec b = kernel_from_json(
        Json::parse(R"({"mode": "bounded", "lambda": 0.5, "Lambda": 2.0,
                        "multiplier": {"name": "cosine"}})"),
        a);
    CHECK(b.mode == KernelMode::Bounded);
    Vec y = vec({0.3, -0.7});
    CHECK(b.multiplier(y) == doctest::Approx(b.multiplier(-1.0 * y)));
    for (double t : {0.1, 0.9, 2.7}) {
        Vec z = vec({t, 0.4 * t});
        double m = b.multiplier(z);
        CHECK(m >= 0.5);
        CHECK(m <= 2.0);
    }
    KernelSpec c = kernel_from_json(
        Json::parse(R"({"mode": "bounded", "lambda": 0.7, "Lambda": 0.7})"), a);
    CHECK(c.multiplier(y) == doctest::Approx(0.7));

    CHECK_THROWS_AS(kernel_from_json(Json::parse(R"({"mode": "reference", "lambda": 1})"), a),
                    std::invalid_argument);
    CHECK_THROWS_AS(kernel_from_json(Json::parse(R"({"mode": "truncated"})"), a),
                    std::invalid_argument);
    CHECK_THROWS_AS(kernel_from_json(Json::parse(R"({"mode": "weird"})"), a),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        kernel_from_json(Json::parse(R"({"mode": "bounded", "lambda": 1, "Lambda": 2,
                                         "multiplier": {"name": "spiky"}})"),
                         a),
        std::invalid_argument);
}

TEST_CASE("grid spec parsing") {
    GridFunction g = grid_from_json(Json::parse(R"({"lo": [-1], "hi": [1], "nodes": [11]})"), 1);
    CHECK(g.size() == 11);
    CHECK(g.h[0] == doctest::Approx(0.2));
    Json meta = grid_meta_json(g);
    CHECK(meta["hi"][0] == doctest::Approx(1.0));
    CHECK(meta["nodes"][0] == 11);

    CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"lo": [-1], "hi": [1], "nodes": [1]})"), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"lo": [-1], "hi": [1], "nodes": [10.5]})"), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        grid_from_json(Json::parse(R"({"lo": [-1, 0], "hi": [1], "nodes": [11]})"), 1),
        std::invalid_argument);
    CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"lo": [-1], "hi": [1]})"), 1),
                    std::invalid_argument);
}

TEST_CASE("field registry values") {
    auto c = field_from_json(Json::parse(R"({"name": "constant", "value": 2.5})"), 2);
    CHECK(c(vec({9.0, -3.0})) == 2.5);

    auto g = field_from_json(Json::parse(R"({"name": "gaussian", "width": 2.0})"), 1);
    CHECK(g(zero_vec(1)) == 1.0);
    CHECK(g(vec({2.0})) == doctest::Approx(std::exp(-1.0)));

    auto cos2 = field_from_json(Json::parse(R"({"name": "cosine", "freq": 0.5})"), 2);
    CHECK(cos2(vec({1.0, 2.0})) == doctest::Approx(std::cos(0.5) * std::cos(1.0)));

    auto hs = field_from_json(Json::parse(R"({"name": "halfspace", "plus": 3, "minus": -1})"), 2);
    CHECK(hs(vec({0.1, -5.0})) == 3.0);
    CHECK(hs(vec({-0.1, 5.0})) == -1.0);

    auto ball = field_from_json(Json::parse(R"({"name": "ball", "radius": 2})"), 1);
    CHECK(ball(vec({1.9})) == 1.0);
    CHECK(ball(vec({2.1})) == 0.0);

    auto tent = field_from_json(Json::parse(R"({"name": "tent"})"), 1);
    CHECK(tent(zero_vec(1)) == 1.0);
    CHECK(tent(vec({1.5})) == doctest::Approx(0.5));
    CHECK(tent(vec({4.0})) == 0.0);

    CHECK_THROWS_AS(field_from_json(Json::parse(R"({"name": "mystery"})"), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(field_from_json(Json::parse(R"({"name": "constant"})"), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(field_from_json(Json::parse(R"({"name": "tent", "freq": 1})"), 1),
                    std::invalid_argument);
}

TEST_CASE("file-backed fields interpolate the saved grid") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "anlg_io_json_field.anlg";
    GridFunction g = make_cube_grid(1, 1.0, 21);
    fill_grid(g, [](const Vec& x) { return 2.0 * x[0]; });
    g.exterior_const = -7.0;
    save_grid(g, p.string());

    Json j;
    j["file"] = p.string();
    auto f = field_from_json(j, 1);
    CHECK(f(vec({0.35})) == doctest::Approx(0.7));
    CHECK(f(vec({5.0})) == -7.0);
    CHECK_THROWS_AS(field_from_json(j, 2), std::invalid_argument);

    EvaluableFunction e = evaluable_from_json(j, 1);
    CHECK(e.f(vec({0.35})) == doctest::Approx(0.7));
    CHECK(e.sup_abs == doctest::Approx(7.0));
    CHECK(e.M >= 1e-6);
    fs::remove(p);

    Json missing;
    missing["file"] = (fs::temp_directory_path() / "anlg_io_json_nope.anlg").string();
    CHECK_THROWS(field_from_json(missing, 1));
}

TEST_CASE("evaluable metadata for smooth names; discontinuous names rejected") {
    EvaluableFunction g = evaluable_from_json(Json::parse(R"({"name": "gaussian", "width": 0.5})"), 2);
    CHECK(g.M == doctest::Approx(4.0));
    CHECK(g.sup_abs == 1.0);
    EvaluableFunction c = evaluable_from_json(Json::parse(R"({"name": "cosine", "freq": 2.0})"), 3);
    CHECK(c.M == doctest::Approx(6.0));

    CHECK_THROWS_AS(evaluable_from_json(Json::parse(R"({"name": "tent"})"), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(evaluable_from_json(Json::parse(R"({"name": "halfspace"})"), 1),
                    std::invalid_argument);
}

TEST_CASE("json files round trip byte for byte") {
    namespace fs = std::filesystem;
    fs::path p1 = fs::temp_directory_path() / "anlg_io_json_a.json";
    fs::path p2 = fs::temp_directory_path() / "anlg_io_json_b.json";
    Json j;
    j["name"] = "run";
    j["values"] = {1.0, 0.25, 1e-17};
    j["nested"]["seed"] = (1ULL << 62) + 3;
    save_json(j, p1.string());
    save_json(load_json(p1.string()), p2.string());

    std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
    CHECK(sa.back() == '\n');
    fs::remove(p1);
    fs::remove(p2);

    CHECK_THROWS_AS(load_json((fs::temp_directory_path() / "anlg_io_json_missing.json").string()),
                    std::runtime_error);
}
