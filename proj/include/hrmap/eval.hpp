#ifndef HRMAP_EVAL_HPP
#define HRMAP_EVAL_HPP

#include <array>
#include <vector>

#include "hrmap/simulate.hpp"

namespace hrmap {

struct ApConfig
{
    std::vector<double> mThresholds { 0.5, 1.0, 1.5 };
    int mResampleK = 100;

    void Validate() const
    {
        if (this->mThresholds.empty())
            throw std::invalid_argument("ApConfig: no thresholds");
        for (std::size_t k = 0; k < this->mThresholds.size(); ++k) {
            if (!(this->mThresholds[k] > 0.0))
                throw std::invalid_argument(
                    "ApConfig: thresholds must be positive");
            if (k > 0 && this->mThresholds[k] <= this->mThresholds[k - 1])
                throw std::invalid_argument(
                    "ApConfig: thresholds must be strictly increasing");
        }
    }
};

struct PredFlag
{
    double mConfidence = 0.0;
    bool mTruePositive = false;
};

struct FrameMatch
{
    std::vector<PredFlag> mPreds;
    int mFalseNegatives = 0;
    int mGtCount = 0;
};

/* Greedy confidence-ordered matching: each prediction takes the
 * unmatched ground truth of its category with the smallest Chamfer
 * distance when that distance is below the threshold */
FrameMatch MatchFrame(const VectorMap& preds, const VectorMap& gts,
                      Category category, double threshold,
                      int resampleK = 100);

/* Area under the monotone-interpolated PR curve over pooled
 * predictions. With no ground truth: 1.0 if there are no predictions,
 * 0.0 otherwise. */
double AveragePrecision(std::vector<PredFlag> preds, std::size_t totalGt);

struct IouResult
{
    std::array<double, NumCategories> mPerCategory { 1.0, 1.0, 1.0 };
    double mMean = 1.0;
};

/* Per-category intersection over union; 1.0 when both sides of a
 * category are empty */
IouResult MaskIou(const LocalMask& a, const LocalMask& b);

struct RevisitResult
{
    double mApFirstVisit = 0.0;
    double mApRevisit = 0.0;
    double mDelta = 0.0;
    std::size_t mFirstVisitFrames = 0;
    std::size_t mRevisitFrames = 0;
    bool mWarning = false;  /* fewer than 10 revisit frames */
};

struct EvalReport
{
    ApConfig mConfig;
    /* [category][threshold index] */
    std::array<std::vector<double>, NumCategories> mApPerThreshold;
    std::array<double, NumCategories> mApPerCategory { 0.0, 0.0, 0.0 };
    double mMeanAp = 0.0;
    /* Pooled raster IoU of predictions against ground truth */
    std::array<double, NumCategories> mIouPerCategory { 1.0, 1.0, 1.0 };
    double mMeanIou = 1.0;
    std::size_t mFrameCount = 0;
    MemoryStats mMemory;
    bool mHasMemory = false;
    RevisitResult mRevisit;
};

/* Chamfer-distance AP over all frames pooled, per category and
 * threshold; category AP is the mean over thresholds and mAP the
 * mean over categories */
EvalReport MapScore(const std::vector<FrameRecord>& log,
                    const ApConfig& config,
                    const RasterOptions& raster = RasterOptions());

RevisitResult RevisitDelta(const std::vector<FrameRecord>& log,
                           const ApConfig& config,
                           double visitedThreshold = 0.5);

/* Quality of the final map against ground truth: mean over frames of
 * the IoU between the map retrieved at the true pose and the
 * rasterized ground-truth crop */
double MapQualityMiou(const GlobalMap& map, const World& world,
                      const std::vector<FrameRecord>& log,
                      const WindowSpec& window,
                      const RasterOptions& raster);

struct SweepCell
{
    double mSigmaT = 0.0;
    double mSigmaR = 0.0;
    double mMeanAp = 0.0;
    double mMeanIou = 0.0;    /* pooled prediction-vs-GT raster IoU */
};

struct SweepResult
{
    std::vector<double> mSigmaTs;
    std::vector<double> mSigmaRs;
    /* Row-major, rows are sigma_r, columns sigma_t */
    std::vector<SweepCell> mCells;
};

/* Re-run the scenario once per (sigma_t, sigma_r) pair with everything
 * else fixed */
SweepResult NoiseSweep(const ScenarioConfig& config,
                       const std::vector<double>& sigmaTs,
                       const std::vector<double>& sigmaRs,
                       const ApConfig& apConfig = ApConfig());

} // namespace hrmap

#endif // HRMAP_EVAL_HPP
