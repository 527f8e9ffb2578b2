#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "lorentz/disintegration.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/io.hpp"
#include "lorentz/models.hpp"
#include "oracles.hpp"

using namespace lorentz;

namespace {

std::string temp_path(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("lorentz-io-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(Io, DenseSpaceRoundtrip)
{
    const auto s = oracle::minkowski_points({{0, 0}, {0.5, 0.1}, {1, 0}, {1, 1}, {1.5, 0.2}, {2, -1}, {2, 0}, {2.5, 0.3}, {3, 0}},
                                            {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const auto r = io_roundtrip(s, temp_path("dense.json"));
    ASSERT_EQ(r.size(), 9);
    EXPECT_EQ(r.coords(), s.coords());
    EXPECT_EQ(r.weight(), s.weight());
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
            EXPECT_EQ(r.leq(i, j), s.leq(i, j));
            EXPECT_EQ(r.tau(i, j), s.tau(i, j));
        }
    EXPECT_EQ(space_hash(r), space_hash(s));
}

TEST(Io, LazyLatticeRoundtripKeepsLookup)
{
    const auto s = discretize(ModelSpacetime::minkowski(2, Region::box({0, 0}, {1, 1})), SamplerConfig::lattice(0.5));
    ASSERT_EQ(s.size(), 9);
    const auto r = io_roundtrip(s, temp_path("lazy.json"));
    EXPECT_EQ(r.coords(), s.coords());
    EXPECT_EQ(r.sample_info().spacing, 0.5);
    const double q[2] = {0.74, 0.26};
    EXPECT_EQ(r.snap(q), s.snap(q));
    EXPECT_EQ(space_hash(r), space_hash(s));
}

TEST(Io, LargeCouplingRoundtrip)
{
    Coupling c;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 10000; ++k) c.pairs.push_back({k, k + 1, u(rng) * 1e-4});
    c.mu = make_measure({0, 1}, {0.25, 0.75});
    c.nu = make_measure({1, 2}, {0.5, 0.5});
    c.p = 0.3;
    c.value = ExtReal::finite(1.0 / 3.0);
    const auto r = io_roundtrip(c, temp_path("coupling.json"));
    ASSERT_EQ(r.pairs.size(), 10000u);
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
        EXPECT_EQ(r.pairs[k].i, c.pairs[k].i);
        EXPECT_EQ(r.pairs[k].j, c.pairs[k].j);
        EXPECT_EQ(r.pairs[k].mass, c.pairs[k].mass);
    }
    EXPECT_EQ(r.mu.mass, c.mu.mass);
    EXPECT_EQ(r.nu.support, c.nu.support);
    EXPECT_EQ(r.p, 0.3);
    EXPECT_EQ(r.value, c.value);
    c.value = ExtReal::minus_infinity();
    EXPECT_TRUE(io_roundtrip(c, temp_path("coupling-inf.json")).value.is_minus_infinity());
}

TEST(Io, RaysRoundtrip)
{
    const auto s = discretize(ModelSpacetime::milne_wedge(2, Region::wedge(0.5, 0.2)), SamplerConfig::lattice(0.1));
    const auto rays = extract_rays(s, transport_relation(s, wedge_hyperboloid(s)));
    const auto r = io_roundtrip(rays, temp_path("rays.json"));
    EXPECT_EQ(r.V.members, rays.V.members);
    ASSERT_EQ(r.rays.size(), rays.rays.size());
    EXPECT_EQ(r.total_mass, rays.total_mass);
    for (std::size_t a = 0; a < r.rays.size(); ++a) {
        EXPECT_EQ(r.rays[a].points, rays.rays[a].points);
        EXPECT_EQ(r.rays[a].t_values, rays.rays[a].t_values);
        EXPECT_EQ(r.rays[a].weights, rays.rays[a].weights);
        EXPECT_EQ(r.rays[a].q_weight, rays.rays[a].q_weight);
        EXPECT_EQ(r.rays[a].foot, rays.rays[a].foot);
    }
}

TEST(Io, RejectsOtherSchemaVersions)
{
    Json j = space_to_json(oracle::minkowski_points({{0, 0}, {1, 0}}));
    j["version"] = 0;
    EXPECT_THROW(space_from_json(j), VersionError);
    j.erase("version");
    EXPECT_THROW(space_from_json(j), VersionError);
    Json m = measure_to_json(make_measure({0}, {1.0}));
    m["schema"] = "coupling";
    EXPECT_THROW(measure_from_json(m), InputError);
    EXPECT_THROW(load_json(temp_path("missing.json")), InputError);
}

TEST(Io, Base64AndHash)
{
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 17u}) {
        std::vector<std::uint8_t> b(n);
        for (std::size_t k = 0; k < n; ++k) b[k] = std::uint8_t(37 * k + 11);
        EXPECT_EQ(base64_decode(base64_encode(b)), b);
    }
    EXPECT_EQ(base64_encode({'M', 'a', 'n'}), "TWFu");
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}
