#include "hrmap/raster.hpp"

#include <algorithm>
#include <cmath>

namespace hrmap {

double PointSegmentDistance(const Point2& p, const Point2& a,
                            const Point2& b)
{
    const Point2 ab = b - a;
    const double sq = ab.squaredNorm();
    if (sq == 0.0)
        return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / sq, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

bool PointInPolygon(const Point2& p, const std::vector<Point2>& polygon)
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double xCross =
                a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < xCross)
                inside = !inside;
        }
    }
    return inside;
}

namespace {

void CheckInputs(const VectorMap& vm, const RasterOptions& options)
{
    if (vm.mFrame != MapFrame::Ego)
        throw std::invalid_argument(
            "RasterizeLocal: vector map must be in the ego frame");
    if (!(options.mStrokeHalfWidth > 0.0))
        throw std::invalid_argument(
            "RasterizeLocal: stroke half-width must be > 0");
}

bool ElementFilled(const MapElement& element, const RasterOptions& options)
{
    return options.mFillCrossings &&
           element.mCategory == Category::Crossing &&
           element.mShape.mPoints.size() >= 3;
}

} // namespace

LocalMask RasterizeLocal(const VectorMap& vm, const WindowSpec& window,
                         const RasterOptions& options)
{
    CheckInputs(vm, options);
    LocalMask mask(window);
    const double res = window.mResolution;
    const double hw = options.mStrokeHalfWidth;
    const int rows = window.Rows();
    const int cols = window.Cols();

    for (const auto& element : vm.mElements) {
        if (element.mConfidence < options.mConfidenceFloor)
            continue;
        const int c = static_cast<int>(element.mCategory);
        const auto& pts = element.mShape.mPoints;

        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            const Point2& a = pts[s];
            const Point2& b = pts[s + 1];
            /* Only the cells whose centers can lie within the stroke */
            const double xLo = std::min(a.x(), b.x()) - hw;
            const double xHi = std::max(a.x(), b.x()) + hw;
            const double yLo = std::min(a.y(), b.y()) - hw;
            const double yHi = std::max(a.y(), b.y()) + hw;
            const int iLo = std::max(0, static_cast<int>(
                std::floor((xLo - window.mXMin) / res - 0.5)));
            const int iHi = std::min(rows - 1, static_cast<int>(
                std::ceil((xHi - window.mXMin) / res - 0.5)));
            const int jLo = std::max(0, static_cast<int>(
                std::floor((yLo - window.mYMin) / res - 0.5)));
            const int jHi = std::min(cols - 1, static_cast<int>(
                std::ceil((yHi - window.mYMin) / res - 0.5)));

            for (int i = iLo; i <= iHi; ++i) {
                for (int j = jLo; j <= jHi; ++j) {
                    const Point2 center = LocalCellCenter(i, j, window);
                    if (PointSegmentDistance(center, a, b) <= hw)
                        mask.Set(i, j, c);
                }
            }
        }

        if (ElementFilled(element, options)) {
            /* Fill inside the closed outline; bounding box of the polygon */
            double xLo = pts[0].x(), xHi = pts[0].x();
            double yLo = pts[0].y(), yHi = pts[0].y();
            for (const auto& p : pts) {
                xLo = std::min(xLo, p.x());
                xHi = std::max(xHi, p.x());
                yLo = std::min(yLo, p.y());
                yHi = std::max(yHi, p.y());
            }
            const int iLo = std::max(0, static_cast<int>(
                std::floor((xLo - window.mXMin) / res - 0.5)));
            const int iHi = std::min(rows - 1, static_cast<int>(
                std::ceil((xHi - window.mXMin) / res - 0.5)));
            const int jLo = std::max(0, static_cast<int>(
                std::floor((yLo - window.mYMin) / res - 0.5)));
            const int jHi = std::min(cols - 1, static_cast<int>(
                std::ceil((yHi - window.mYMin) / res - 0.5)));
            for (int i = iLo; i <= iHi; ++i)
                for (int j = jLo; j <= jHi; ++j)
                    if (PointInPolygon(LocalCellCenter(i, j, window), pts))
                        mask.Set(i, j, c);
        }
    }
    return mask;
}

LocalMask RasterizeLocalBruteForce(const VectorMap& vm,
                                   const WindowSpec& window,
                                   const RasterOptions& options)
{
    CheckInputs(vm, options);
    LocalMask mask(window);
    const int rows = window.Rows();
    const int cols = window.Cols();

    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const Point2 center = LocalCellCenter(i, j, window);
            for (const auto& element : vm.mElements) {
                if (element.mConfidence < options.mConfidenceFloor)
                    continue;
                const int c = static_cast<int>(element.mCategory);
                if (mask.At(i, j, c))
                    continue;
                const auto& pts = element.mShape.mPoints;
                bool hit = false;
                for (std::size_t s = 0; s + 1 < pts.size() && !hit; ++s)
                    hit = PointSegmentDistance(center, pts[s], pts[s + 1])
                          <= options.mStrokeHalfWidth;
                if (!hit && ElementFilled(element, options))
                    hit = PointInPolygon(center, pts);
                if (hit)
                    mask.Set(i, j, c);
            }
        }
    }
    return mask;
}

std::vector<MaskPoint> MaskToPoints(const LocalMask& mask)
{
    std::vector<MaskPoint> out;
    const int rows = mask.mWindow.Rows();
    const int cols = mask.mWindow.Cols();
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            std::array<std::uint8_t, NumCategories> bits {};
            bool any = false;
            for (int c = 0; c < NumCategories; ++c) {
                bits[c] = mask.At(i, j, c);
                any = any || bits[c];
            }
            if (any)
                out.push_back(MaskPoint { CellIndex(i, j), bits });
        }
    }
    return out;
}

} // namespace hrmap
