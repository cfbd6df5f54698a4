#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hrmap/raster.hpp"
#include "hrmap/rng.hpp"

using namespace hrmap;

namespace {

VectorMap RandomVectorMap(Xoshiro256ss& rng, int maxElements = 10)
{
    VectorMap vm;
    vm.mFrame = MapFrame::Ego;
    const int count = 1 + static_cast<int>(rng.Uniform() * maxElements);
    for (int e = 0; e < count; ++e) {
        const auto category = static_cast<Category>(
            std::min(2, static_cast<int>(rng.Uniform() * 3)));
        std::vector<Point2> pts;
        const int vertices = 2 + static_cast<int>(rng.Uniform() * 4);
        Point2 p(rng.Uniform(-35, 35), rng.Uniform(-18, 18));
        pts.push_back(p);
        for (int v = 1; v < vertices; ++v) {
            p += Point2(rng.Uniform(-8, 8), rng.Uniform(-8, 8));
            pts.push_back(p);
        }
        if (!Polyline(pts).IsValid())
            continue;
        vm.mElements.emplace_back(category, Polyline(pts),
                                  rng.Uniform(0.1, 1.0));
    }
    return vm;
}

std::size_t CountSet(const LocalMask& mask)
{
    std::size_t n = 0;
    for (int c = 0; c < NumCategories; ++c)
        n += static_cast<std::size_t>((mask.mPlanes[c] != 0).count());
    return n;
}

} // namespace

TEST_CASE("empty map rasterizes to zeros")
{
    VectorMap vm;
    const LocalMask mask = RasterizeLocal(vm, WindowSpec());
    CHECK(CountSet(mask) == 0);
    CHECK(CountSet(RasterizeLocalBruteForce(vm, WindowSpec())) == 0);
}

TEST_CASE("frame mismatch rejected")
{
    VectorMap vm;
    vm.mFrame = MapFrame::World;
    CHECK_THROWS_AS(RasterizeLocal(vm, WindowSpec()),
                    std::invalid_argument);
}

TEST_CASE("single boundary segment matches per-cell distance oracle")
{
    const WindowSpec window;
    VectorMap vm;
    vm.mElements.emplace_back(
        Category::Boundary,
        Polyline({ Point2(-3, 0), Point2(3, 0) }));
    const LocalMask mask = RasterizeLocal(vm, window);

    CHECK((mask.mPlanes[0] != 0).count() == 0);
    CHECK((mask.mPlanes[1] != 0).count() == 0);
    CHECK((mask.mPlanes[2] != 0).count() > 0);

    for (int i = 0; i < window.Rows(); ++i) {
        for (int j = 0; j < window.Cols(); ++j) {
            const Point2 c = LocalCellCenter(i, j, window);
            const bool expected =
                PointSegmentDistance(c, Point2(-3, 0), Point2(3, 0))
                <= 0.15;
            CHECK(bool(mask.At(i, j, 2)) == expected);
        }
    }
}

TEST_CASE("overlapping elements give idempotent union")
{
    const WindowSpec window;
    VectorMap one;
    one.mElements.emplace_back(
        Category::Divider, Polyline({ Point2(0, -5), Point2(0, 5) }));
    VectorMap two = one;
    two.mElements.push_back(two.mElements.front());

    CHECK(RasterizeLocal(one, window) == RasterizeLocal(two, window));
}

TEST_CASE("optimized rasterizer equals brute force on seeded maps")
{
    Xoshiro256ss rng(2024);
    const WindowSpec window;
    for (int n = 0; n < 100; ++n) {
        const VectorMap vm = RandomVectorMap(rng);
        CHECK(RasterizeLocal(vm, window) ==
              RasterizeLocalBruteForce(vm, window));
    }
}

TEST_CASE("monotonicity: adding an element never clears a cell")
{
    Xoshiro256ss rng(55);
    const WindowSpec window;
    for (int n = 0; n < 20; ++n) {
        VectorMap vm = RandomVectorMap(rng, 5);
        const LocalMask before = RasterizeLocal(vm, window);
        vm.mElements.emplace_back(
            Category::Crossing,
            Polyline({ Point2(rng.Uniform(-10, 10), rng.Uniform(-5, 5)),
                       Point2(rng.Uniform(-10, 10),
                              rng.Uniform(-5, 5)) }));
        if (!vm.mElements.back().mShape.IsValid()) {
            vm.mElements.pop_back();
            continue;
        }
        const LocalMask after = RasterizeLocal(vm, window);
        for (int c = 0; c < NumCategories; ++c)
            CHECK(((before.mPlanes[c] == 0) ||
                   (after.mPlanes[c] != 0)).all());
    }
}

TEST_CASE("tiny stroke only covers on-line cell centers")
{
    const WindowSpec window;
    VectorMap vm;
    /* segment passing exactly through a row of cell centers */
    vm.mElements.emplace_back(
        Category::Divider,
        Polyline({ Point2(-0.15 - 3.0, 0.15), Point2(-0.15 + 3.0, 0.15) }));
    RasterOptions options;
    options.mStrokeHalfWidth = 1e-6;
    const LocalMask mask = RasterizeLocal(vm, window, options);
    for (const auto& point : MaskToPoints(mask)) {
        const Point2 c = LocalCellCenter(point.mCell.x(),
                                         point.mCell.y(), window);
        CHECK(std::abs(c.y() - 0.15) < 1e-5);
    }
    CHECK(CountSet(mask) > 0);
}

TEST_CASE("category isolation")
{
    Xoshiro256ss rng(77);
    const WindowSpec window;
    VectorMap vm;
    vm.mElements.emplace_back(
        Category::Crossing,
        Polyline({ Point2(-4, -4), Point2(4, -4), Point2(4, 4),
                   Point2(-4, 4), Point2(-4, -4) }));
    const LocalMask mask = RasterizeLocal(vm, window);
    CHECK((mask.mPlanes[0] != 0).count() == 0);
    CHECK((mask.mPlanes[1] != 0).count() > 0);
    CHECK((mask.mPlanes[2] != 0).count() == 0);
}

TEST_CASE("confidence floor filters elements")
{
    const WindowSpec window;
    VectorMap vm;
    vm.mElements.emplace_back(
        Category::Divider, Polyline({ Point2(0, -5), Point2(0, 5) }),
        0.2);
    RasterOptions options;
    options.mConfidenceFloor = 0.5;
    CHECK(CountSet(RasterizeLocal(vm, window, options)) == 0);
    CHECK(CountSet(RasterizeLocalBruteForce(vm, window, options)) == 0);
}

TEST_CASE("filled crossings cover the interior")
{
    const WindowSpec window;
    VectorMap vm;
    vm.mElements.emplace_back(
        Category::Crossing,
        Polyline({ Point2(-4, -4), Point2(4, -4), Point2(4, 4),
                   Point2(-4, 4), Point2(-4, -4) }));
    RasterOptions filled;
    filled.mFillCrossings = true;

    const LocalMask outline = RasterizeLocal(vm, window);
    const LocalMask fill = RasterizeLocal(vm, window, filled);
    CHECK((fill.mPlanes[1] != 0).count() >
          (outline.mPlanes[1] != 0).count());
    /* interior cell well away from the outline */
    const CellIndex inside = LocalCellOf(Point2(0, 0), window);
    CHECK(fill.At(inside.x(), inside.y(), 1) == 1);
    CHECK(outline.At(inside.x(), inside.y(), 1) == 0);
    CHECK(RasterizeLocalBruteForce(vm, window, filled) == fill);
}

TEST_CASE("mask_to_points ordering and content")
{
    const WindowSpec window;
    LocalMask mask(window);
    CHECK(MaskToPoints(mask).empty());

    mask.Set(10, 20, 1);
    auto points = MaskToPoints(mask);
    REQUIRE(points.size() == 1);
    CHECK(points[0].mCell == CellIndex(10, 20));
    CHECK(points[0].mBits == std::array<std::uint8_t, 3> { 0, 1, 0 });

    mask.Set(5, 99, 0);
    mask.Set(10, 19, 2);
    points = MaskToPoints(mask);
    REQUIRE(points.size() == 3);
    /* row-major order */
    CHECK(points[0].mCell == CellIndex(5, 99));
    CHECK(points[1].mCell == CellIndex(10, 19));
    CHECK(points[2].mCell == CellIndex(10, 20));
}
