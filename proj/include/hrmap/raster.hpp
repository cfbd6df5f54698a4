#ifndef HRMAP_RASTER_HPP
#define HRMAP_RASTER_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "hrmap/geometry.hpp"

namespace hrmap {

/* Map element categories; stable integer codes */
enum class Category : int
{
    Divider = 0,
    Crossing = 1,
    Boundary = 2,
};

constexpr int NumCategories = 3;

inline const char* CategoryName(Category c)
{
    switch (c) {
        case Category::Divider: return "divider";
        case Category::Crossing: return "crossing";
        case Category::Boundary: return "boundary";
    }
    return "unknown";
}

enum class MapFrame : int
{
    Ego = 0,
    World = 1,
};

/* Categorized polyline with a detection confidence */
struct MapElement
{
    Category mCategory = Category::Divider;
    Polyline mShape;
    double mConfidence = 1.0;

    MapElement() = default;
    MapElement(Category category, Polyline shape, double confidence = 1.0)
        : mCategory(category), mShape(std::move(shape)),
          mConfidence(confidence) { }
};

struct VectorMap
{
    MapFrame mFrame = MapFrame::Ego;
    std::vector<MapElement> mElements;
};

using MaskPlane =
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/* Per-category binary grid over the ego-centric perception window.
 * Plane (i, j) indexes (x-forward row, y-left column). */
struct LocalMask
{
    WindowSpec mWindow;
    std::array<MaskPlane, NumCategories> mPlanes;

    LocalMask() : LocalMask(WindowSpec()) { }
    explicit LocalMask(const WindowSpec& window) : mWindow(window)
    {
        for (auto& plane : this->mPlanes)
            plane = MaskPlane::Zero(window.Rows(), window.Cols());
    }

    std::uint8_t At(int i, int j, int c) const
        { return this->mPlanes[c](i, j); }
    void Set(int i, int j, int c, std::uint8_t v = 1)
        { this->mPlanes[c](i, j) = v; }

    bool operator==(const LocalMask& other) const
    {
        if (!(this->mWindow == other.mWindow))
            return false;
        for (int c = 0; c < NumCategories; ++c)
            if (!(this->mPlanes[c] == other.mPlanes[c]).all())
                return false;
        return true;
    }
};

struct RasterOptions
{
    /* Half a cell at the default 0.3 m resolution, so strokes are
     * about one cell wide without aliasing gaps */
    double mStrokeHalfWidth = 0.15;
    /* Elements below this confidence are dropped before rasterization */
    double mConfidenceFloor = 0.0;
    /* Render pedestrian-crossing polygons filled instead of outlined */
    bool mFillCrossings = false;
};

/* Distance from a point to a line segment */
double PointSegmentDistance(const Point2& p, const Point2& a,
                            const Point2& b);

/* Even-odd test against a closed polygon */
bool PointInPolygon(const Point2& p, const std::vector<Point2>& polygon);

/* Rasterize an ego-frame vector map to a per-category binary mask:
 * a cell is set when its center lies within the stroke half-width of
 * some element's polyline */
LocalMask RasterizeLocal(const VectorMap& vm, const WindowSpec& window,
                         const RasterOptions& options = RasterOptions());

/* Reference rasterizer evaluating every cell against every segment
 * directly; test oracle for RasterizeLocal */
LocalMask RasterizeLocalBruteForce(
    const VectorMap& vm, const WindowSpec& window,
    const RasterOptions& options = RasterOptions());

struct MaskPoint
{
    CellIndex mCell;
    std::array<std::uint8_t, NumCategories> mBits;
};

/* All cells with any channel set, row-major order */
std::vector<MaskPoint> MaskToPoints(const LocalMask& mask);

} // namespace hrmap

#endif // HRMAP_RASTER_HPP
