#ifndef HRMAP_SIMULATE_HPP
#define HRMAP_SIMULATE_HPP

#include <optional>
#include <string>
#include <vector>

#include "hrmap/mapstore.hpp"
#include "hrmap/raster.hpp"
#include "hrmap/rng.hpp"

namespace hrmap {

/* Manhattan-style synthetic world layout */
struct WorldParams
{
    int mBlocksX = 3;
    int mBlocksY = 3;
    double mBlockSize = 100.0;
    double mRoadHalfWidth = 3.5;
    double mCrossingDepth = 3.0;
    double mGtPointSpacing = 5.0;

    bool operator==(const WorldParams&) const = default;
};

struct World
{
    VectorMap mGtMap;   /* world frame */
    double mXMin = 0.0;
    double mYMin = 0.0;
    double mXMax = 0.0;
    double mYMax = 0.0;
    std::uint64_t mSeed = 0;
    WorldParams mParams;
};

World GenerateWorld(std::uint64_t seed,
                    const WorldParams& params = WorldParams());

enum class TrajectoryKind : int
{
    Loop = 0,
    OutAndBack = 1,
    Grid = 2,
};

struct TimedPose
{
    double mTime = 0.0;
    Pose2 mPose;
};

struct Trajectory
{
    std::string mId;
    std::vector<TimedPose> mPoses;
};

/* Poses follow road centerlines (lane-offset for out-and-back);
 * corners are rounded so consecutive yaw steps stay small */
Trajectory GenerateTrajectory(const World& world, std::uint64_t seed,
                              TrajectoryKind kind,
                              const std::string& id = "veh0");

/* Clip a polyline to an axis-aligned rectangle; an element crossing
 * the boundary splits into multiple pieces, order preserved */
std::vector<Polyline> ClipPolylineToRect(const Polyline& pl,
                                         double xMin, double xMax,
                                         double yMin, double yMax);

/* Ground-truth elements visible in the window, transformed to the
 * ego frame and clipped to the window rectangle */
VectorMap CropGroundTruth(const World& world, const Pose2& pose,
                          const WindowSpec& window);

struct NoiseParams
{
    double mSigmaT = 0.0;           /* translation pose noise, meters */
    double mSigmaR = 0.0;           /* rotation pose noise, radians */
    double mPointJitter = 0.15;     /* per-vertex Gaussian, meters */
    double mBaseRecall = 0.7;       /* per-element detection prob. */
    int mOcclusionSectors = 1;      /* hidden angular sectors per frame */
    double mOcclusionWidth = M_PI / 3.0;
    double mFalsePositiveRate = 0.2;

    void Validate() const
    {
        if (mSigmaT < 0.0 || mSigmaR < 0.0 || mPointJitter < 0.0)
            throw std::invalid_argument("NoiseParams: negative sigma");
        if (mBaseRecall < 0.0 || mBaseRecall > 1.0)
            throw std::invalid_argument(
                "NoiseParams: base_recall outside [0,1]");
        if (mOcclusionSectors < 0 || mFalsePositiveRate < 0.0)
            throw std::invalid_argument("NoiseParams: negative rate");
    }
};

struct FusionPolicy
{
    /* Fraction of an element's rasterized cells that must be present
     * in the prior mask before the recall boost applies */
    double mPriorOverlapThreshold = 0.3;
    double mRecallBoost = 0.25;
};

/* Synthetic perceiver: recall-limited, occlusion-limited, vertex-
 * jittered detections of the visible ground truth, plus spurious
 * elements. A retrieved prior mask raises per-element recall, which
 * is the stand-in for prior-conditioned perception. */
VectorMap Perceive(const World& world, const Pose2& pose,
                   const WindowSpec& window, const NoiseParams& noise,
                   const LocalMask* prior, const FusionPolicy& fusion,
                   const RasterOptions& raster, Xoshiro256ss& rng);

Pose2 PerturbPose(const Pose2& pose, double sigmaT, double sigmaR,
                  Xoshiro256ss& rng);

struct ScenarioConfig
{
    World mWorld;
    std::vector<Trajectory> mTrajectories;
    NoiseParams mNoise;
    FusionPolicy mFusion;
    UpdateParams mUpdate;
    WindowSpec mWindow;
    RasterOptions mRaster;
    GridSpec mGrid;
    int mTileSize = 256;
    std::string mInitialMapPath;    /* empty: start from an empty map */
    std::uint64_t mRngSeed = 0;
};

struct FrameRecord
{
    std::size_t mFrameIndex = 0;
    double mTime = 0.0;
    std::string mTrajectoryId;
    Pose2 mTruePose;
    Pose2 mNoisyPose;
    VectorMap mPrediction;          /* ego frame */
    VectorMap mGroundTruth;         /* ego frame */
    /* Historical prior handed to the perceiver: the retrieved window
     * restricted to cells first written by another vehicle, an initial
     * map, or this vehicle before the window last left the area */
    LocalMask mPrior;
    double mVisitedFraction = 0.0;
};

struct ScenarioResult
{
    GlobalMap mMap;
    std::vector<FrameRecord> mLog;
};

/* Closed loop: perturb pose, retrieve prior, perceive, rasterize,
 * update. Deterministic for a fixed config; per-frame RNG streams are
 * derived from (rng_seed, trajectory id, frame index). */
ScenarioResult RunScenario(const ScenarioConfig& config);

} // namespace hrmap

#endif // HRMAP_SIMULATE_HPP
