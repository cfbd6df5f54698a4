#include "hrmap/eval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hrmap {

FrameMatch MatchFrame(const VectorMap& preds, const VectorMap& gts,
                      Category category, double threshold, int resampleK)
{
    FrameMatch result;

    std::vector<std::size_t> predIdx;
    for (std::size_t k = 0; k < preds.mElements.size(); ++k)
        if (preds.mElements[k].mCategory == category)
            predIdx.push_back(k);
    std::stable_sort(predIdx.begin(), predIdx.end(),
                     [&](std::size_t a, std::size_t b) {
                         return preds.mElements[a].mConfidence >
                                preds.mElements[b].mConfidence;
                     });

    std::vector<std::vector<Point2>> gtSamples;
    for (const auto& element : gts.mElements)
        if (element.mCategory == category)
            gtSamples.push_back(
                ResamplePolyline(element.mShape, resampleK).mPoints);
    result.mGtCount = static_cast<int>(gtSamples.size());
    std::vector<bool> gtUsed(gtSamples.size(), false);

    for (const std::size_t p : predIdx) {
        const auto predSamples =
            ResamplePolyline(preds.mElements[p].mShape, resampleK)
                .mPoints;
        double best = std::numeric_limits<double>::infinity();
        std::size_t bestGt = gtSamples.size();
        for (std::size_t g = 0; g < gtSamples.size(); ++g) {
            if (gtUsed[g])
                continue;
            const double d = ChamferPoints(predSamples, gtSamples[g]);
            if (d < best) {
                best = d;
                bestGt = g;
            }
        }
        const bool matched = bestGt < gtSamples.size() &&
                             best < threshold;
        if (matched)
            gtUsed[bestGt] = true;
        result.mPreds.push_back(PredFlag {
            preds.mElements[p].mConfidence, matched });
    }
    result.mFalseNegatives = static_cast<int>(
        std::count(gtUsed.begin(), gtUsed.end(), false));
    return result;
}

double AveragePrecision(std::vector<PredFlag> preds, std::size_t totalGt)
{
    if (totalGt == 0)
        return preds.empty() ? 1.0 : 0.0;
    if (preds.empty())
        return 0.0;

    std::stable_sort(preds.begin(), preds.end(),
                     [](const PredFlag& a, const PredFlag& b) {
                         return a.mConfidence > b.mConfidence;
                     });

    std::vector<double> precision(preds.size());
    std::vector<bool> isTp(preds.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        if (preds[k].mTruePositive)
            ++tp;
        precision[k] = static_cast<double>(tp) /
                       static_cast<double>(k + 1);
        isTp[k] = preds[k].mTruePositive;
    }
    /* Monotone envelope from the right */
    for (std::size_t k = preds.size() - 1; k-- > 0;)
        precision[k] = std::max(precision[k], precision[k + 1]);

    double area = 0.0;
    for (std::size_t k = 0; k < preds.size(); ++k)
        if (isTp[k])
            area += precision[k] / static_cast<double>(totalGt);
    return area;
}

IouResult MaskIou(const LocalMask& a, const LocalMask& b)
{
    if (!(a.mWindow == b.mWindow))
        throw std::invalid_argument("MaskIou: shape mismatch");

    IouResult result;
    double sum = 0.0;
    for (int c = 0; c < NumCategories; ++c) {
        const auto setA = a.mPlanes[c] != 0;
        const auto setB = b.mPlanes[c] != 0;
        const auto inter = (setA && setB).count();
        const auto uni = (setA || setB).count();
        result.mPerCategory[c] = uni == 0
            ? 1.0
            : static_cast<double>(inter) / static_cast<double>(uni);
        sum += result.mPerCategory[c];
    }
    result.mMean = sum / NumCategories;
    return result;
}

namespace {

/* Pooled AP over a subset of frames, per category and threshold */
void PooledAp(const std::vector<const FrameRecord*>& frames,
              const ApConfig& config, EvalReport& report)
{
    for (int c = 0; c < NumCategories; ++c) {
        report.mApPerThreshold[c].assign(config.mThresholds.size(), 0.0);
        for (std::size_t t = 0; t < config.mThresholds.size(); ++t) {
            std::vector<PredFlag> pooled;
            std::size_t totalGt = 0;
            for (const FrameRecord* frame : frames) {
                const FrameMatch match = MatchFrame(
                    frame->mPrediction, frame->mGroundTruth,
                    static_cast<Category>(c), config.mThresholds[t],
                    config.mResampleK);
                pooled.insert(pooled.end(), match.mPreds.begin(),
                              match.mPreds.end());
                totalGt += static_cast<std::size_t>(match.mGtCount);
            }
            report.mApPerThreshold[c][t] =
                AveragePrecision(std::move(pooled), totalGt);
        }
        report.mApPerCategory[c] = std::accumulate(
            report.mApPerThreshold[c].begin(),
            report.mApPerThreshold[c].end(), 0.0) /
            static_cast<double>(config.mThresholds.size());
    }
    report.mMeanAp = (report.mApPerCategory[0] +
                      report.mApPerCategory[1] +
                      report.mApPerCategory[2]) / 3.0;
}

double PooledMeanAp(const std::vector<const FrameRecord*>& frames,
                    const ApConfig& config)
{
    EvalReport scratch;
    PooledAp(frames, config, scratch);
    return scratch.mMeanAp;
}

} // namespace

EvalReport MapScore(const std::vector<FrameRecord>& log,
                    const ApConfig& config, const RasterOptions& raster)
{
    config.Validate();
    EvalReport report;
    report.mConfig = config;
    report.mFrameCount = log.size();

    std::vector<const FrameRecord*> frames;
    frames.reserve(log.size());
    for (const auto& record : log)
        frames.push_back(&record);
    PooledAp(frames, config, report);

    /* Pooled raster IoU of predictions vs ground truth */
    std::array<std::size_t, NumCategories> inter {};
    std::array<std::size_t, NumCategories> uni {};
    for (const auto& record : log) {
        const WindowSpec& window = record.mPrior.mWindow;
        const LocalMask predMask =
            RasterizeLocal(record.mPrediction, window, raster);
        const LocalMask gtMask =
            RasterizeLocal(record.mGroundTruth, window, raster);
        for (int c = 0; c < NumCategories; ++c) {
            const auto setA = predMask.mPlanes[c] != 0;
            const auto setB = gtMask.mPlanes[c] != 0;
            inter[c] += static_cast<std::size_t>((setA && setB).count());
            uni[c] += static_cast<std::size_t>((setA || setB).count());
        }
    }
    double iouSum = 0.0;
    for (int c = 0; c < NumCategories; ++c) {
        report.mIouPerCategory[c] = uni[c] == 0
            ? 1.0
            : static_cast<double>(inter[c]) /
              static_cast<double>(uni[c]);
        iouSum += report.mIouPerCategory[c];
    }
    report.mMeanIou = iouSum / NumCategories;
    return report;
}

RevisitResult RevisitDelta(const std::vector<FrameRecord>& log,
                           const ApConfig& config,
                           double visitedThreshold)
{
    config.Validate();
    RevisitResult result;

    std::vector<const FrameRecord*> firstVisit;
    std::vector<const FrameRecord*> revisit;
    for (const auto& record : log) {
        if (record.mVisitedFraction >= visitedThreshold)
            revisit.push_back(&record);
        else
            firstVisit.push_back(&record);
    }
    result.mFirstVisitFrames = firstVisit.size();
    result.mRevisitFrames = revisit.size();
    result.mWarning = revisit.size() < 10;

    result.mApFirstVisit =
        firstVisit.empty() ? 0.0 : PooledMeanAp(firstVisit, config);
    result.mApRevisit =
        revisit.empty() ? 0.0 : PooledMeanAp(revisit, config);
    result.mDelta = result.mApRevisit - result.mApFirstVisit;
    return result;
}

double MapQualityMiou(const GlobalMap& map, const World& world,
                      const std::vector<FrameRecord>& log,
                      const WindowSpec& window,
                      const RasterOptions& raster)
{
    if (log.empty())
        return 1.0;
    double sum = 0.0;
    for (const auto& record : log) {
        const LocalMask retrieved =
            map.Retrieve(record.mTruePose, window);
        const LocalMask gtMask = RasterizeLocal(
            CropGroundTruth(world, record.mTruePose, window), window,
            raster);
        sum += MaskIou(retrieved, gtMask).mMean;
    }
    return sum / static_cast<double>(log.size());
}

SweepResult NoiseSweep(const ScenarioConfig& config,
                       const std::vector<double>& sigmaTs,
                       const std::vector<double>& sigmaRs,
                       const ApConfig& apConfig)
{
    SweepResult result;
    result.mSigmaTs = sigmaTs;
    result.mSigmaRs = sigmaRs;

    for (const double sigmaR : sigmaRs) {
        for (const double sigmaT : sigmaTs) {
            ScenarioConfig run = config;
            run.mNoise.mSigmaT = sigmaT;
            run.mNoise.mSigmaR = sigmaR;
            const ScenarioResult outcome = RunScenario(run);
            const EvalReport report =
                MapScore(outcome.mLog, apConfig, run.mRaster);
            SweepCell cell;
            cell.mSigmaT = sigmaT;
            cell.mSigmaR = sigmaR;
            cell.mMeanAp = report.mMeanAp;
            cell.mMeanIou = report.mMeanIou;
            result.mCells.push_back(cell);
        }
    }
    return result;
}

} // namespace hrmap
