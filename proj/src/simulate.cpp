#include "hrmap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace hrmap {

namespace {

constexpr double PathSampleSpacing = 0.5;   /* meters between frames */
constexpr double PathSpeed = 10.0;          /* meters per second */
constexpr double CornerRadius = 6.0;        /* fillet radius, meters */
constexpr double LaneOffset = 2.0;          /* out-and-back lane shift */

Polyline ResampledSegment(const Point2& a, const Point2& b,
                          double spacing)
{
    const double len = (b - a).norm();
    const int k = std::max(2, static_cast<int>(std::ceil(len / spacing)) + 1);
    return ResamplePolyline(Polyline({ a, b }), k);
}

Polyline RectangleOutline(double xLo, double xHi, double yLo, double yHi)
{
    return Polyline({ Point2(xLo, yLo), Point2(xHi, yLo),
                      Point2(xHi, yHi), Point2(xLo, yHi),
                      Point2(xLo, yLo) });
}

std::uint64_t Fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

World GenerateWorld(std::uint64_t seed, const WorldParams& params)
{
    World world;
    world.mSeed = seed;
    world.mParams = params;
    world.mGtMap.mFrame = MapFrame::World;

    const int bx = params.mBlocksX;
    const int by = params.mBlocksY;
    const double B = params.mBlockSize;
    const double h = params.mRoadHalfWidth;
    const double cd = params.mCrossingDepth;
    const double margin = h + cd + 1.0;

    if (bx <= 0 || by <= 0) {
        world.mXMin = world.mYMin = 0.0;
        world.mXMax = world.mYMax = 0.0;
        return world;
    }

    world.mXMin = -margin;
    world.mYMin = -margin;
    world.mXMax = bx * B + margin;
    world.mYMax = by * B + margin;

    auto& elements = world.mGtMap.mElements;
    const double sp = params.mGtPointSpacing;

    /* Vertical roads x = i*B, segments between intersections */
    for (int i = 0; i <= bx; ++i) {
        const double x = i * B;
        for (int j = 0; j < by; ++j) {
            const double yLo = j * B + h;
            const double yHi = (j + 1) * B - h;
            elements.emplace_back(Category::Divider, ResampledSegment(
                Point2(x, yLo + cd), Point2(x, yHi - cd), sp));
            elements.emplace_back(Category::Boundary, ResampledSegment(
                Point2(x - h, yLo), Point2(x - h, yHi), sp));
            elements.emplace_back(Category::Boundary, ResampledSegment(
                Point2(x + h, yLo), Point2(x + h, yHi), sp));
        }
    }
    /* Horizontal roads y = j*B */
    for (int j = 0; j <= by; ++j) {
        const double y = j * B;
        for (int i = 0; i < bx; ++i) {
            const double xLo = i * B + h;
            const double xHi = (i + 1) * B - h;
            elements.emplace_back(Category::Divider, ResampledSegment(
                Point2(xLo + cd, y), Point2(xHi - cd, y), sp));
            elements.emplace_back(Category::Boundary, ResampledSegment(
                Point2(xLo, y - h), Point2(xHi, y - h), sp));
            elements.emplace_back(Category::Boundary, ResampledSegment(
                Point2(xLo, y + h), Point2(xHi, y + h), sp));
        }
    }
    /* Pedestrian crossings across each intersection arm */
    for (int i = 0; i <= bx; ++i) {
        for (int j = 0; j <= by; ++j) {
            const double x = i * B;
            const double y = j * B;
            if (j < by)     /* north arm, across the vertical road */
                elements.emplace_back(Category::Crossing,
                    RectangleOutline(x - h, x + h, y + h, y + h + cd));
            if (j > 0)      /* south arm */
                elements.emplace_back(Category::Crossing,
                    RectangleOutline(x - h, x + h, y - h - cd, y - h));
            if (i < bx)     /* east arm, across the horizontal road */
                elements.emplace_back(Category::Crossing,
                    RectangleOutline(x + h, x + h + cd, y - h, y + h));
            if (i > 0)      /* west arm */
                elements.emplace_back(Category::Crossing,
                    RectangleOutline(x - h - cd, x - h, y - h, y + h));
        }
    }
    return world;
}

namespace {

Point2 Perp(const Point2& u) { return Point2(-u.y(), u.x()); }

/* Replace interior corners of a waypoint chain with circular fillets */
std::vector<Point2> FilletPath(const std::vector<Point2>& waypoints,
                               double radius)
{
    std::vector<Point2> dense;
    if (waypoints.size() < 2)
        return dense;
    dense.push_back(waypoints.front());

    for (std::size_t k = 1; k + 1 < waypoints.size(); ++k) {
        const Point2& corner = waypoints[k];
        const Point2 uIn = (corner - waypoints[k - 1]).normalized();
        const Point2 uOut = (waypoints[k + 1] - corner).normalized();
        const double cross = uIn.x() * uOut.y() - uIn.y() * uOut.x();
        const double dot = std::clamp(uIn.dot(uOut), -1.0, 1.0);
        const double turn = std::atan2(std::abs(cross), dot);
        if (turn < 1e-6) {
            dense.push_back(corner);
            continue;
        }
        const double lenIn = (corner - waypoints[k - 1]).norm();
        const double lenOut = (waypoints[k + 1] - corner).norm();
        double tangent = radius * std::tan(turn / 2.0);
        tangent = std::min(tangent, 0.4 * std::min(lenIn, lenOut));
        const double r = tangent / std::tan(turn / 2.0);
        const double side = cross >= 0.0 ? 1.0 : -1.0;

        const Point2 p1 = corner - tangent * uIn;
        const Point2 center = p1 + side * r * Perp(uIn);
        const double startAngle =
            std::atan2(p1.y() - center.y(), p1.x() - center.x());
        const int steps = std::max(2, static_cast<int>(
            std::ceil(turn / 0.05)));
        for (int s = 0; s <= steps; ++s) {
            const double a = startAngle + side * turn * s / steps;
            dense.push_back(center + r * Point2(std::cos(a), std::sin(a)));
        }
    }
    dense.push_back(waypoints.back());
    return dense;
}

/* Sample a dense path at constant arclength spacing; yaw follows the
 * local tangent */
std::vector<TimedPose> SamplePath(const std::vector<Point2>& dense,
                                  double spacing, double speed)
{
    std::vector<TimedPose> out;
    if (dense.size() < 2)
        return out;

    std::vector<double> cumulative(dense.size(), 0.0);
    for (std::size_t k = 1; k < dense.size(); ++k)
        cumulative[k] = cumulative[k - 1] +
                        (dense[k] - dense[k - 1]).norm();
    const double total = cumulative.back();

    const int count = static_cast<int>(std::floor(total / spacing)) + 1;
    std::size_t seg = 0;
    for (int n = 0; n < count; ++n) {
        const double s = std::min(total, n * spacing);
        while (seg + 2 < dense.size() && cumulative[seg + 1] < s)
            ++seg;
        const double segLen = cumulative[seg + 1] - cumulative[seg];
        const double alpha =
            segLen > 0.0 ? (s - cumulative[seg]) / segLen : 0.0;
        const Point2 p = dense[seg] + alpha * (dense[seg + 1] - dense[seg]);
        const Point2 dir = dense[seg + 1] - dense[seg];
        const double yaw = std::atan2(dir.y(), dir.x());
        out.push_back(TimedPose { s / speed, Pose2(p.x(), p.y(), yaw) });
    }
    return out;
}

} // namespace

Trajectory GenerateTrajectory(const World& world, std::uint64_t seed,
                              TrajectoryKind kind, const std::string& id)
{
    const int bx = world.mParams.mBlocksX;
    const int by = world.mParams.mBlocksY;
    const double B = world.mParams.mBlockSize;
    if (bx <= 0 || by <= 0)
        throw std::invalid_argument("GenerateTrajectory: empty world");

    Xoshiro256ss rng(MixSeed(seed, 0x7261 /* 'tr' */));
    Trajectory traj;
    traj.mId = id;

    std::vector<Point2> dense;
    switch (kind) {
        case TrajectoryKind::Loop: {
            const int i = std::min(bx - 1,
                static_cast<int>(rng.Uniform() * bx));
            const int j = std::min(by - 1,
                static_cast<int>(rng.Uniform() * by));
            const bool ccw = rng.Uniform() < 0.5;
            const Point2 c0(i * B, j * B);
            const Point2 c1((i + 1) * B, j * B);
            const Point2 c2((i + 1) * B, (j + 1) * B);
            const Point2 c3(i * B, (j + 1) * B);
            const Point2 mid((i + 0.5) * B, j * B);
            std::vector<Point2> ring = ccw
                ? std::vector<Point2> { c1, c2, c3, c0 }
                : std::vector<Point2> { c0, c3, c2, c1 };
            /* Two laps so the second lap revisits the first */
            std::vector<Point2> waypoints { mid };
            for (int lap = 0; lap < 2; ++lap)
                waypoints.insert(waypoints.end(), ring.begin(), ring.end());
            waypoints.push_back(mid);
            dense = FilletPath(waypoints, CornerRadius);
            break;
        }
        case TrajectoryKind::OutAndBack: {
            const int j = std::min(by,
                static_cast<int>(rng.Uniform() * (by + 1)));
            const double y0 = j * B;
            const double L = bx * B;
            dense.push_back(Point2(0.0, y0 - LaneOffset));
            dense.push_back(Point2(L, y0 - LaneOffset));
            /* U-turn semicircle at the far end */
            const int steps = 40;
            for (int s = 1; s < steps; ++s) {
                const double a = -M_PI / 2.0 + M_PI * s / steps;
                dense.push_back(Point2(L, y0) + LaneOffset *
                                Point2(std::cos(a), std::sin(a)));
            }
            dense.push_back(Point2(L, y0 + LaneOffset));
            dense.push_back(Point2(0.0, y0 + LaneOffset));
            break;
        }
        case TrajectoryKind::Grid: {
            std::vector<Point2> waypoints;
            const double L = bx * B;
            for (int j = 0; j <= by; ++j) {
                const double y = j * B;
                if (j % 2 == 0) {
                    waypoints.push_back(Point2(0.0, y));
                    waypoints.push_back(Point2(L, y));
                } else {
                    waypoints.push_back(Point2(L, y));
                    waypoints.push_back(Point2(0.0, y));
                }
            }
            dense = FilletPath(waypoints, CornerRadius);
            break;
        }
    }

    traj.mPoses = SamplePath(dense, PathSampleSpacing, PathSpeed);
    return traj;
}

std::vector<Polyline> ClipPolylineToRect(const Polyline& pl,
                                         double xMin, double xMax,
                                         double yMin, double yMax)
{
    std::vector<Polyline> pieces;
    std::vector<Point2> current;

    const auto flush = [&]() {
        if (current.size() >= 2 &&
            Polyline(current).ArcLength() > 1e-9)
            pieces.emplace_back(current);
        current.clear();
    };

    for (std::size_t s = 0; s + 1 < pl.mPoints.size(); ++s) {
        const Point2& a = pl.mPoints[s];
        const Point2& b = pl.mPoints[s + 1];
        const Point2 d = b - a;

        /* Liang-Barsky */
        double t0 = 0.0;
        double t1 = 1.0;
        bool rejected = false;
        const double p[4] = { -d.x(), d.x(), -d.y(), d.y() };
        const double q[4] = { a.x() - xMin, xMax - a.x(),
                              a.y() - yMin, yMax - a.y() };
        for (int e = 0; e < 4 && !rejected; ++e) {
            if (p[e] == 0.0) {
                if (q[e] < 0.0)
                    rejected = true;
            } else {
                const double t = q[e] / p[e];
                if (p[e] < 0.0)
                    t0 = std::max(t0, t);
                else
                    t1 = std::min(t1, t);
                if (t0 > t1)
                    rejected = true;
            }
        }
        if (rejected) {
            flush();
            continue;
        }

        const Point2 ca = a + t0 * d;
        const Point2 cb = a + t1 * d;
        if (current.empty()) {
            current.push_back(ca);
        } else if ((current.back() - ca).norm() > 1e-9) {
            flush();
            current.push_back(ca);
        }
        current.push_back(cb);
        if (t1 < 1.0)
            flush();
    }
    flush();
    return pieces;
}

VectorMap CropGroundTruth(const World& world, const Pose2& pose,
                          const WindowSpec& window)
{
    VectorMap out;
    out.mFrame = MapFrame::Ego;

    for (const auto& element : world.mGtMap.mElements) {
        std::vector<Point2> ego;
        ego.reserve(element.mShape.mPoints.size());
        for (const auto& p : element.mShape.mPoints)
            ego.push_back(SE2InverseApply(pose, p));
        const auto pieces = ClipPolylineToRect(
            Polyline(std::move(ego)), window.mXMin, window.mXMax,
            window.mYMin, window.mYMax);
        for (const auto& piece : pieces)
            out.mElements.emplace_back(element.mCategory, piece,
                                       element.mConfidence);
    }
    return out;
}

VectorMap Perceive(const World& world, const Pose2& pose,
                   const WindowSpec& window, const NoiseParams& noise,
                   const LocalMask* prior, const FusionPolicy& fusion,
                   const RasterOptions& raster, Xoshiro256ss& rng)
{
    noise.Validate();
    const VectorMap gt = CropGroundTruth(world, pose, window);
    VectorMap out;
    out.mFrame = MapFrame::Ego;

    std::vector<double> sectorCenters;
    for (int s = 0; s < noise.mOcclusionSectors; ++s)
        sectorCenters.push_back(rng.Uniform(-M_PI, M_PI));

    for (const auto& element : gt.mElements) {
        const double recallDraw = rng.Uniform();

        Point2 centroid = Point2::Zero();
        for (const auto& p : element.mShape.mPoints)
            centroid += p;
        centroid /= static_cast<double>(element.mShape.mPoints.size());
        const double angle = std::atan2(centroid.y(), centroid.x());
        bool occluded = false;
        for (const double c : sectorCenters)
            occluded = occluded || std::abs(NormalizeAngle(angle - c)) <=
                                   noise.mOcclusionWidth / 2.0;
        if (occluded)
            continue;

        double recall = noise.mBaseRecall;
        if (prior != nullptr && fusion.mRecallBoost > 0.0) {
            VectorMap single;
            single.mFrame = MapFrame::Ego;
            single.mElements.push_back(element);
            const LocalMask cells = RasterizeLocal(single, window, raster);
            const int channel = static_cast<int>(element.mCategory);
            const auto total = (cells.mPlanes[channel] != 0).count();
            if (total > 0) {
                const auto hits = ((cells.mPlanes[channel] != 0) &&
                                   (prior->mPlanes[channel] != 0)).count();
                if (static_cast<double>(hits) /
                    static_cast<double>(total) >=
                    fusion.mPriorOverlapThreshold)
                    recall = std::min(1.0, recall + fusion.mRecallBoost);
            }
        }
        if (recallDraw >= recall)
            continue;

        std::vector<Point2> jittered;
        jittered.reserve(element.mShape.mPoints.size());
        for (const auto& p : element.mShape.mPoints)
            jittered.push_back(p + Point2(
                rng.Gaussian(noise.mPointJitter),
                rng.Gaussian(noise.mPointJitter)));
        const double confidence = rng.Uniform(0.6, 0.95);
        out.mElements.emplace_back(element.mCategory,
                                   Polyline(std::move(jittered)),
                                   confidence);
    }

    const int spurious = rng.Poisson(noise.mFalsePositiveRate);
    for (int f = 0; f < spurious; ++f) {
        const Point2 center(rng.Uniform(window.mXMin, window.mXMax),
                            rng.Uniform(window.mYMin, window.mYMax));
        const double angle = rng.Uniform(0.0, 2.0 * M_PI);
        const double length = rng.Uniform(2.0, 6.0);
        const auto category = static_cast<Category>(
            std::min(NumCategories - 1,
                     static_cast<int>(rng.Uniform() * NumCategories)));
        const double confidence = rng.Uniform(0.3, 0.6);
        const Point2 dir(std::cos(angle), std::sin(angle));
        out.mElements.emplace_back(category, Polyline({
            center - 0.5 * length * dir, center,
            center + 0.5 * length * dir }), confidence);
    }
    return out;
}

Pose2 PerturbPose(const Pose2& pose, double sigmaT, double sigmaR,
                  Xoshiro256ss& rng)
{
    if (sigmaT < 0.0 || sigmaR < 0.0)
        throw std::invalid_argument("PerturbPose: negative sigma");
    const double dx = rng.Gaussian(sigmaT);
    const double dy = rng.Gaussian(sigmaT);
    const double dyaw = rng.Gaussian(sigmaR);
    return Pose2(pose.mX + dx, pose.mY + dy, pose.mYaw + dyaw);
}

ScenarioResult RunScenario(const ScenarioConfig& config)
{
    config.mNoise.Validate();
    config.mUpdate.Validate();
    if (std::abs(config.mGrid.mResolution - config.mWindow.mResolution) >
        1e-12)
        throw std::invalid_argument(
            "RunScenario: grid and window resolutions must match");
    for (const auto& traj : config.mTrajectories)
        for (std::size_t k = 1; k < traj.mPoses.size(); ++k)
            if (!(traj.mPoses[k].mTime > traj.mPoses[k - 1].mTime))
                throw std::invalid_argument(
                    "RunScenario: trajectory timestamps must be "
                    "strictly increasing");

    GlobalMap map = config.mInitialMapPath.empty()
        ? GlobalMap(config.mGrid, config.mTileSize, config.mUpdate)
        : GlobalMap::Load(config.mInitialMapPath);
    if (std::abs(map.Grid().mResolution - config.mWindow.mResolution) >
        1e-12)
        throw std::invalid_argument(
            "RunScenario: initial map resolution does not match window");

    /* Frames of all trajectories merged by timestamp */
    struct FrameRef
    {
        double mTime;
        std::size_t mTrajIndex;
        std::size_t mPoseIndex;
    };
    std::vector<FrameRef> frames;
    for (std::size_t t = 0; t < config.mTrajectories.size(); ++t)
        for (std::size_t k = 0;
             k < config.mTrajectories[t].mPoses.size(); ++k)
            frames.push_back(FrameRef {
                config.mTrajectories[t].mPoses[k].mTime, t, k });
    std::stable_sort(frames.begin(), frames.end(),
                     [](const FrameRef& a, const FrameRef& b) {
                         return a.mTime < b.mTime;
                     });

    const WindowSpec& window = config.mWindow;
    const int rows = window.Rows();
    const int cols = window.Cols();

    /* A cell only counts as historical for a frame when it was first
     * written by another vehicle, by an initial map, or by this vehicle
     * far enough back along its own path that the sliding window has
     * left the area; otherwise every frame of a contiguous sweep would
     * trivially "revisit" the cells of its predecessor, and the
     * perceiver would be handed its own seconds-old predictions as a
     * prior. Both the visited fraction and the prior fed to Perceive
     * use this partition */
    struct VisitRecord
    {
        std::size_t mTrajIndex;
        double mDistance;
    };
    std::unordered_map<std::int64_t, VisitRecord> visited;
    const double lagDistance = std::hypot(window.mXMax - window.mXMin,
                                          window.mYMax - window.mYMin);

    std::vector<std::vector<double>> cumulative(
        config.mTrajectories.size());
    for (std::size_t t = 0; t < config.mTrajectories.size(); ++t) {
        const auto& poses = config.mTrajectories[t].mPoses;
        cumulative[t].resize(poses.size(), 0.0);
        for (std::size_t k = 1; k < poses.size(); ++k)
            cumulative[t][k] = cumulative[t][k - 1] +
                std::hypot(poses[k].mPose.mX - poses[k - 1].mPose.mX,
                           poses[k].mPose.mY - poses[k - 1].mPose.mY);
    }

    const auto cellKey = [](const CellIndex& g) {
        return (static_cast<std::int64_t>(g.x()) << 32) ^
               (static_cast<std::int64_t>(g.y()) & 0xffffffffLL);
    };

    /* Cells carried in by an initial map predate this run entirely */
    if (!config.mInitialMapPath.empty()) {
        const int ts = map.TileSize();
        const std::size_t plane = static_cast<std::size_t>(ts) * ts;
        for (const auto& [tile, payload] : map.Tiles()) {
            for (int ly = 0; ly < ts; ++ly) {
                for (int lx = 0; lx < ts; ++lx) {
                    const std::size_t at =
                        static_cast<std::size_t>(ly) * ts + lx;
                    bool written = false;
                    for (int c = 0; c < NumCategories && !written; ++c)
                        written = payload[c * plane + at] != 0;
                    if (!written)
                        continue;
                    visited.emplace(
                        cellKey(CellIndex(tile.second * ts + lx,
                                          tile.first * ts + ly)),
                        VisitRecord {
                            std::numeric_limits<std::size_t>::max(),
                            -std::numeric_limits<double>::infinity() });
                }
            }
        }
    }

    ScenarioResult result { std::move(map), {} };
    result.mLog.reserve(frames.size());

    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& ref = frames[k];
        const auto& traj = config.mTrajectories[ref.mTrajIndex];
        const Pose2 truePose = traj.mPoses[ref.mPoseIndex].mPose;

        /* Per-frame stream keyed by trajectory id, not index, so a
         * trajectory replays identically whether it runs alone or
         * interleaved with others */
        Xoshiro256ss rng(MixSeed(config.mRngSeed, Fnv1a(traj.mId),
                                 ref.mPoseIndex));

        const Pose2 noisyPose = PerturbPose(
            truePose, config.mNoise.mSigmaT, config.mNoise.mSigmaR, rng);
        LocalMask prior = result.mMap.Retrieve(noisyPose, window);

        /* Keep only the historical part of the retrieved prior: cells
         * this vehicle wrote moments ago on the same sweep say nothing
         * beyond what the perceiver already produced */
        const double distance = cumulative[ref.mTrajIndex][ref.mPoseIndex];
        std::size_t revisitedCells = 0;
        std::vector<std::int64_t> footprint;
        footprint.reserve(static_cast<std::size_t>(rows) * cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                const Point2 world = SE2Apply(
                    noisyPose, LocalCellCenter(i, j, window));
                const std::int64_t key =
                    cellKey(MetricToCell(world, result.mMap.Grid()));
                const auto it = visited.find(key);
                const bool historical = it != visited.end() &&
                    (it->second.mTrajIndex != ref.mTrajIndex ||
                     distance - it->second.mDistance > lagDistance);
                if (historical)
                    ++revisitedCells;
                else
                    for (int c = 0; c < NumCategories; ++c)
                        prior.mPlanes[c](i, j) = 0;
                footprint.push_back(key);
            }
        }
        const double visitedFraction =
            static_cast<double>(revisitedCells) /
            static_cast<double>(rows * cols);
        for (const std::int64_t key : footprint)
            visited.emplace(key, VisitRecord { ref.mTrajIndex, distance });

        VectorMap prediction = Perceive(
            config.mWorld, truePose, window, config.mNoise, &prior,
            config.mFusion, config.mRaster, rng);
        const LocalMask mask =
            RasterizeLocal(prediction, window, config.mRaster);

        result.mMap.Update(mask, noisyPose);

        FrameRecord record;
        record.mFrameIndex = k;
        record.mTime = ref.mTime;
        record.mTrajectoryId = traj.mId;
        record.mTruePose = truePose;
        record.mNoisyPose = noisyPose;
        record.mPrediction = std::move(prediction);
        record.mGroundTruth = CropGroundTruth(
            config.mWorld, truePose, window);
        record.mPrior = std::move(prior);
        record.mVisitedFraction = visitedFraction;
        result.mLog.push_back(std::move(record));
    }
    return result;
}

} // namespace hrmap
