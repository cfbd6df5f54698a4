#ifndef HRMAP_GEOMETRY_HPP
#define HRMAP_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hrmap {

using Point2 = Eigen::Vector2d;
using CellIndex = Eigen::Vector2i;

inline double NormalizeAngle(double a)
{
    a = std::remainder(a, 2.0 * M_PI);
    /* remainder() returns values in [-pi, pi]; fold -pi to +pi */
    if (a <= -M_PI)
        a += 2.0 * M_PI;
    return a;
}

/* SE(2) ego-pose on the BEV plane */
struct Pose2
{
    double mX = 0.0;
    double mY = 0.0;
    double mYaw = 0.0;

    Pose2() = default;
    Pose2(double x, double y, double yaw)
        : mX(x), mY(y), mYaw(NormalizeAngle(yaw)) { }

    Point2 Translation() const { return Point2(this->mX, this->mY); }
    Eigen::Rotation2Dd Rotation() const
        { return Eigen::Rotation2Dd(this->mYaw); }

    bool IsFinite() const
    {
        return std::isfinite(this->mX) && std::isfinite(this->mY) &&
               std::isfinite(this->mYaw);
    }
};

/* Local (ego) point to world frame: R(yaw) p + t */
inline Point2 SE2Apply(const Pose2& pose, const Point2& p)
{
    return pose.Rotation() * p + pose.Translation();
}

/* World point to local (ego) frame: R(yaw)^T (p^g - t) */
inline Point2 SE2InverseApply(const Pose2& pose, const Point2& pGlobal)
{
    return pose.Rotation().inverse() * (pGlobal - pose.Translation());
}

inline Pose2 SE2Compose(const Pose2& a, const Pose2& b)
{
    const Point2 t = SE2Apply(a, b.Translation());
    return Pose2(t.x(), t.y(), a.mYaw + b.mYaw);
}

/* Rounding is half-away-from-zero so that the convention is symmetric
 * about the origin and trivially portable */
inline long RoundHalfAwayFromZero(double v)
{
    return static_cast<long>(
        v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

/* Anchor and resolution of the global rasterized grid */
struct GridSpec
{
    Point2 mOrigin { 0.0, 0.0 };
    double mResolution = 0.3;

    GridSpec() = default;
    GridSpec(const Point2& origin, double resolution)
        : mOrigin(origin), mResolution(resolution)
    {
        if (!(resolution > 0.0))
            throw std::invalid_argument("GridSpec: resolution must be > 0");
    }

    bool operator==(const GridSpec& other) const
    {
        return this->mOrigin == other.mOrigin &&
               this->mResolution == other.mResolution;
    }
};

inline CellIndex MetricToCell(const Point2& p, const GridSpec& grid)
{
    return CellIndex(
        static_cast<int>(RoundHalfAwayFromZero(
            (p.x() - grid.mOrigin.x()) / grid.mResolution)),
        static_cast<int>(RoundHalfAwayFromZero(
            (p.y() - grid.mOrigin.y()) / grid.mResolution)));
}

inline Point2 CellCenter(const CellIndex& idx, const GridSpec& grid)
{
    return grid.mOrigin +
           Point2(idx.x() * grid.mResolution, idx.y() * grid.mResolution);
}

/* Ego-centric perception window; x is forward, y is left.
 * Rows index x (H cells), columns index y (W cells). */
struct WindowSpec
{
    double mXMin = -30.0;
    double mXMax = 30.0;
    double mYMin = -15.0;
    double mYMax = 15.0;
    double mResolution = 0.3;

    WindowSpec() = default;
    WindowSpec(double xMin, double xMax, double yMin, double yMax,
               double resolution)
        : mXMin(xMin), mXMax(xMax), mYMin(yMin), mYMax(yMax),
          mResolution(resolution)
    {
        if (!(resolution > 0.0))
            throw std::invalid_argument("WindowSpec: resolution must be > 0");
        if (!(xMax > xMin) || !(yMax > yMin))
            throw std::invalid_argument("WindowSpec: empty extent");
        const double nx = (xMax - xMin) / resolution;
        const double ny = (yMax - yMin) / resolution;
        if (std::abs(nx - std::round(nx)) > 1e-9 ||
            std::abs(ny - std::round(ny)) > 1e-9)
            throw std::invalid_argument(
                "WindowSpec: extent must be an integer multiple "
                "of the resolution");
    }

    int Rows() const
    {
        return static_cast<int>(
            std::round((this->mXMax - this->mXMin) / this->mResolution));
    }
    int Cols() const
    {
        return static_cast<int>(
            std::round((this->mYMax - this->mYMin) / this->mResolution));
    }

    bool Contains(const Point2& p) const
    {
        return p.x() >= this->mXMin && p.x() <= this->mXMax &&
               p.y() >= this->mYMin && p.y() <= this->mYMax;
    }

    bool operator==(const WindowSpec& other) const
    {
        return this->mXMin == other.mXMin && this->mXMax == other.mXMax &&
               this->mYMin == other.mYMin && this->mYMax == other.mYMax &&
               this->mResolution == other.mResolution;
    }
};

/* Center of local cell (i, j), cell-center convention with a
 * half-cell offset from the window corner */
inline Point2 LocalCellCenter(int i, int j, const WindowSpec& window)
{
    if (i < 0 || i >= window.Rows() || j < 0 || j >= window.Cols())
        throw std::out_of_range("LocalCellCenter: index out of range");
    return Point2(window.mXMin + (i + 0.5) * window.mResolution,
                  window.mYMin + (j + 0.5) * window.mResolution);
}

/* Nearest local cell of an ego-frame point; may fall outside [0,H)x[0,W) */
inline CellIndex LocalCellOf(const Point2& p, const WindowSpec& window)
{
    return CellIndex(
        static_cast<int>(RoundHalfAwayFromZero(
            (p.x() - window.mXMin) / window.mResolution - 0.5)),
        static_cast<int>(RoundHalfAwayFromZero(
            (p.y() - window.mYMin) / window.mResolution - 0.5)));
}

inline bool LocalCellInRange(const CellIndex& idx, const WindowSpec& window)
{
    return idx.x() >= 0 && idx.x() < window.Rows() &&
           idx.y() >= 0 && idx.y() < window.Cols();
}

/* Ordered point sequence with at least two points */
struct Polyline
{
    std::vector<Point2> mPoints;

    Polyline() = default;
    explicit Polyline(std::vector<Point2> points)
        : mPoints(std::move(points)) { }

    std::size_t Size() const { return this->mPoints.size(); }

    double ArcLength() const
    {
        double len = 0.0;
        for (std::size_t k = 1; k < this->mPoints.size(); ++k)
            len += (this->mPoints[k] - this->mPoints[k - 1]).norm();
        return len;
    }

    bool IsValid() const
    {
        if (this->mPoints.size() < 2)
            return false;
        for (const auto& p : this->mPoints)
            if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
                return false;
        return this->ArcLength() > 0.0;
    }
};

/* Resample to k points equally spaced by arclength, endpoints exact */
inline Polyline ResamplePolyline(const Polyline& pl, int k)
{
    if (k < 2)
        throw std::invalid_argument("ResamplePolyline: k must be >= 2");
    if (pl.mPoints.size() < 2)
        throw std::invalid_argument("ResamplePolyline: need >= 2 points");

    const double total = pl.ArcLength();
    if (!(total > 0.0))
        throw std::invalid_argument(
            "ResamplePolyline: zero-length polyline");

    std::vector<double> cumulative(pl.mPoints.size(), 0.0);
    for (std::size_t s = 1; s < pl.mPoints.size(); ++s)
        cumulative[s] = cumulative[s - 1] +
                        (pl.mPoints[s] - pl.mPoints[s - 1]).norm();

    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(k));
    out.push_back(pl.mPoints.front());

    std::size_t seg = 0;
    for (int n = 1; n < k - 1; ++n) {
        const double target = total * n / (k - 1);
        while (seg + 2 < pl.mPoints.size() && cumulative[seg + 1] < target)
            ++seg;
        const double segLen = cumulative[seg + 1] - cumulative[seg];
        const double alpha =
            segLen > 0.0 ? (target - cumulative[seg]) / segLen : 0.0;
        out.push_back(pl.mPoints[seg] +
                      alpha * (pl.mPoints[seg + 1] - pl.mPoints[seg]));
    }
    out.push_back(pl.mPoints.back());
    return Polyline(std::move(out));
}

/* Symmetric mean-of-mins Chamfer distance between two point sets */
inline double ChamferPoints(const std::vector<Point2>& a,
                            const std::vector<Point2>& b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("ChamferPoints: empty point set");

    const auto meanOfMins = [](const std::vector<Point2>& from,
                               const std::vector<Point2>& to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to)
                best = std::min(best, (p - q).norm());
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };

    return 0.5 * (meanOfMins(a, b) + meanOfMins(b, a));
}

inline double ChamferDistance(const Polyline& a, const Polyline& b,
                              int k = 100)
{
    return ChamferPoints(ResamplePolyline(a, k).mPoints,
                         ResamplePolyline(b, k).mPoints);
}

} // namespace hrmap

#endif // HRMAP_GEOMETRY_HPP
