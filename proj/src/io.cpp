#include "hrmap/io.hpp"

#include <fstream>
#include <sstream>

namespace hrmap {

namespace {

Json PoseToJson(const Pose2& pose)
{
    return Json::array({ pose.mX, pose.mY, pose.mYaw });
}

Pose2 PoseFromJson(const Json& j)
{
    return Pose2(j.at(0).get<double>(), j.at(1).get<double>(),
                 j.at(2).get<double>());
}

Json ElementToJson(const MapElement& element)
{
    Json pts = Json::array();
    for (const auto& p : element.mShape.mPoints)
        pts.push_back(Json::array({ p.x(), p.y() }));
    return Json { { "cat", static_cast<int>(element.mCategory) },
                  { "conf", element.mConfidence },
                  { "pts", std::move(pts) } };
}

MapElement ElementFromJson(const Json& j)
{
    std::vector<Point2> pts;
    for (const auto& p : j.at("pts"))
        pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    const int cat = j.at("cat").get<int>();
    if (cat < 0 || cat >= NumCategories)
        throw std::invalid_argument("element: bad category code");
    return MapElement(static_cast<Category>(cat),
                      Polyline(std::move(pts)),
                      j.at("conf").get<double>());
}

Json ElementsToJson(const VectorMap& vm)
{
    Json out = Json::array();
    for (const auto& element : vm.mElements)
        out.push_back(ElementToJson(element));
    return out;
}

VectorMap ElementsFromJson(const Json& j, MapFrame frame)
{
    VectorMap vm;
    vm.mFrame = frame;
    for (const auto& e : j)
        vm.mElements.push_back(ElementFromJson(e));
    return vm;
}

} // namespace

Json ToJson(const WorldParams& params)
{
    return Json { { "blocks_x", params.mBlocksX },
                  { "blocks_y", params.mBlocksY },
                  { "block_size", params.mBlockSize },
                  { "road_halfwidth", params.mRoadHalfWidth },
                  { "crossing_depth", params.mCrossingDepth },
                  { "gt_point_spacing", params.mGtPointSpacing } };
}

WorldParams WorldParamsFromJson(const Json& j)
{
    WorldParams params;
    params.mBlocksX = j.value("blocks_x", params.mBlocksX);
    params.mBlocksY = j.value("blocks_y", params.mBlocksY);
    params.mBlockSize = j.value("block_size", params.mBlockSize);
    params.mRoadHalfWidth =
        j.value("road_halfwidth", params.mRoadHalfWidth);
    params.mCrossingDepth =
        j.value("crossing_depth", params.mCrossingDepth);
    params.mGtPointSpacing =
        j.value("gt_point_spacing", params.mGtPointSpacing);
    return params;
}

Json ToJson(const World& world)
{
    return Json { { "seed", world.mSeed },
                  { "params", ToJson(world.mParams) },
                  { "extent", Json::array({ world.mXMin, world.mYMin,
                                            world.mXMax, world.mYMax }) },
                  { "elements", ElementsToJson(world.mGtMap) } };
}

World WorldFromJson(const Json& j)
{
    /* Worlds are reproducible from (seed, params); the stored element
     * list is authoritative only if it matches a regeneration */
    World world = GenerateWorld(j.at("seed").get<std::uint64_t>(),
                                WorldParamsFromJson(j.at("params")));
    if (j.contains("elements"))
        world.mGtMap = ElementsFromJson(j.at("elements"),
                                        MapFrame::World);
    return world;
}

Json ToJson(const Trajectory& traj)
{
    Json poses = Json::array();
    for (const auto& tp : traj.mPoses)
        poses.push_back(Json::array({ tp.mTime, tp.mPose.mX,
                                      tp.mPose.mY, tp.mPose.mYaw }));
    return Json { { "id", traj.mId }, { "poses", std::move(poses) } };
}

Trajectory TrajectoryFromJson(const Json& j)
{
    Trajectory traj;
    traj.mId = j.at("id").get<std::string>();
    for (const auto& p : j.at("poses"))
        traj.mPoses.push_back(TimedPose {
            p.at(0).get<double>(),
            Pose2(p.at(1).get<double>(), p.at(2).get<double>(),
                  p.at(3).get<double>()) });
    return traj;
}

Json ToJson(const WindowSpec& window)
{
    return Json { { "x_min", window.mXMin }, { "x_max", window.mXMax },
                  { "y_min", window.mYMin }, { "y_max", window.mYMax },
                  { "resolution", window.mResolution } };
}

WindowSpec WindowSpecFromJson(const Json& j)
{
    const WindowSpec defaults;
    return WindowSpec(j.value("x_min", defaults.mXMin),
                      j.value("x_max", defaults.mXMax),
                      j.value("y_min", defaults.mYMin),
                      j.value("y_max", defaults.mYMax),
                      j.value("resolution", defaults.mResolution));
}

Json ToJson(const NoiseParams& noise)
{
    return Json { { "sigma_t", noise.mSigmaT },
                  { "sigma_r", noise.mSigmaR },
                  { "point_jitter", noise.mPointJitter },
                  { "base_recall", noise.mBaseRecall },
                  { "occlusion_sectors", noise.mOcclusionSectors },
                  { "occlusion_width", noise.mOcclusionWidth },
                  { "false_positive_rate", noise.mFalsePositiveRate } };
}

NoiseParams NoiseParamsFromJson(const Json& j)
{
    NoiseParams noise;
    noise.mSigmaT = j.value("sigma_t", noise.mSigmaT);
    noise.mSigmaR = j.value("sigma_r", noise.mSigmaR);
    noise.mPointJitter = j.value("point_jitter", noise.mPointJitter);
    noise.mBaseRecall = j.value("base_recall", noise.mBaseRecall);
    noise.mOcclusionSectors =
        j.value("occlusion_sectors", noise.mOcclusionSectors);
    noise.mOcclusionWidth =
        j.value("occlusion_width", noise.mOcclusionWidth);
    noise.mFalsePositiveRate =
        j.value("false_positive_rate", noise.mFalsePositiveRate);
    noise.Validate();
    return noise;
}

Json ToJson(const FusionPolicy& fusion)
{
    return Json { { "prior_overlap_threshold",
                    fusion.mPriorOverlapThreshold },
                  { "recall_boost", fusion.mRecallBoost } };
}

FusionPolicy FusionPolicyFromJson(const Json& j)
{
    FusionPolicy fusion;
    fusion.mPriorOverlapThreshold =
        j.value("prior_overlap_threshold",
                fusion.mPriorOverlapThreshold);
    fusion.mRecallBoost = j.value("recall_boost", fusion.mRecallBoost);
    return fusion;
}

Json ToJson(const UpdateParams& params)
{
    return Json { { "s_plus", params.mSPlus },
                  { "s_minus", params.mSMinus },
                  { "s_th", params.mSThreshold } };
}

UpdateParams UpdateParamsFromJson(const Json& j)
{
    UpdateParams params;
    params.mSPlus = j.value("s_plus", params.mSPlus);
    params.mSMinus = j.value("s_minus", params.mSMinus);
    params.mSThreshold = j.value("s_th", params.mSThreshold);
    params.Validate();
    return params;
}

Json ToJson(const RasterOptions& options)
{
    return Json { { "stroke_halfwidth", options.mStrokeHalfWidth },
                  { "confidence_floor", options.mConfidenceFloor },
                  { "fill_crossings", options.mFillCrossings } };
}

RasterOptions RasterOptionsFromJson(const Json& j)
{
    RasterOptions options;
    options.mStrokeHalfWidth =
        j.value("stroke_halfwidth", options.mStrokeHalfWidth);
    options.mConfidenceFloor =
        j.value("confidence_floor", options.mConfidenceFloor);
    options.mFillCrossings =
        j.value("fill_crossings", options.mFillCrossings);
    return options;
}

Json ToJson(const EvalReport& report)
{
    const char* names[NumCategories] = { "div", "ped", "bou" };
    /* Report keys follow the usual category shorthand */
    Json perCategory;
    Json perThreshold;
    perCategory["div"] = report.mApPerCategory[0];
    perCategory["ped"] = report.mApPerCategory[1];
    perCategory["bou"] = report.mApPerCategory[2];
    const int order[NumCategories] = { 0, 1, 2 };
    for (int c = 0; c < NumCategories; ++c)
        perThreshold[names[c]] = report.mApPerThreshold[order[c]];

    Json j {
        { "thresholds", report.mConfig.mThresholds },
        { "ap_per_threshold", perThreshold },
        { "ap", perCategory },
        { "mAP", report.mMeanAp },
        { "iou", Json { { "div", report.mIouPerCategory[0] },
                        { "ped", report.mIouPerCategory[1] },
                        { "bou", report.mIouPerCategory[2] } } },
        { "mIoU", report.mMeanIou },
        { "frames", report.mFrameCount },
        { "revisit", Json {
            { "mAP_first_visit", report.mRevisit.mApFirstVisit },
            { "mAP_revisit", report.mRevisit.mApRevisit },
            { "delta", report.mRevisit.mDelta },
            { "first_visit_frames", report.mRevisit.mFirstVisitFrames },
            { "revisit_frames", report.mRevisit.mRevisitFrames },
            { "warning_low_revisit", report.mRevisit.mWarning } } },
    };
    if (report.mHasMemory)
        j["memory"] = Json {
            { "allocated_tiles", report.mMemory.mAllocatedTiles },
            { "stored_bytes", report.mMemory.mStoredBytes },
            { "index_overhead_bytes",
              report.mMemory.mIndexOverheadBytes },
            { "visited_extent_m2", report.mMemory.mVisitedExtentM2 } };
    return j;
}

TrajectoryKind TrajectoryKindFromName(const std::string& name)
{
    if (name == "loop")
        return TrajectoryKind::Loop;
    if (name == "outback")
        return TrajectoryKind::OutAndBack;
    if (name == "grid")
        return TrajectoryKind::Grid;
    throw std::invalid_argument(
        "unknown trajectory kind: " + name);
}

void SaveJson(const Json& j, const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::trunc);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());
    file << j.dump(2) << '\n';
    if (!file)
        throw std::runtime_error("write failed for " + path.string());
}

Json LoadJsonFile(const std::filesystem::path& path)
{
    std::ifstream file(path);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());
    Json j;
    file >> j;
    return j;
}

ScenarioConfig ScenarioFromJson(const Json& j,
                                const std::filesystem::path& baseDir)
{
    ScenarioConfig config;
    config.mRngSeed = j.value("rng_seed", std::uint64_t { 0 });

    if (j.contains("world_file"))
        config.mWorld = WorldFromJson(LoadJsonFile(
            baseDir / j.at("world_file").get<std::string>()));
    else if (j.contains("world"))
        config.mWorld = GenerateWorld(
            j.at("world").value("seed", std::uint64_t { 0 }),
            j.at("world").contains("params")
                ? WorldParamsFromJson(j.at("world").at("params"))
                : WorldParams());
    else
        throw std::invalid_argument(
            "scenario: missing world or world_file");

    if (!j.contains("trajectories") || !j.at("trajectories").is_array()
        || j.at("trajectories").empty())
        throw std::invalid_argument("scenario: missing trajectories");
    std::size_t index = 0;
    for (const auto& t : j.at("trajectories")) {
        if (t.contains("file")) {
            config.mTrajectories.push_back(TrajectoryFromJson(
                LoadJsonFile(baseDir / t.at("file").get<std::string>())));
        } else {
            const std::string id =
                t.value("id", "veh" + std::to_string(index));
            config.mTrajectories.push_back(GenerateTrajectory(
                config.mWorld, t.value("seed", std::uint64_t { 0 }),
                TrajectoryKindFromName(t.value("kind", "loop")), id));
        }
        ++index;
    }

    if (j.contains("noise"))
        config.mNoise = NoiseParamsFromJson(j.at("noise"));
    if (j.contains("fusion"))
        config.mFusion = FusionPolicyFromJson(j.at("fusion"));
    if (j.contains("update"))
        config.mUpdate = UpdateParamsFromJson(j.at("update"));
    if (j.contains("window"))
        config.mWindow = WindowSpecFromJson(j.at("window"));
    if (j.contains("raster"))
        config.mRaster = RasterOptionsFromJson(j.at("raster"));
    config.mTileSize = j.value("tile_size", config.mTileSize);
    if (j.contains("initial_map"))
        config.mInitialMapPath =
            (baseDir / j.at("initial_map").get<std::string>()).string();

    config.mGrid = GridSpec(Point2(0.0, 0.0), config.mWindow.mResolution);
    return config;
}

ScenarioConfig LoadScenario(const std::filesystem::path& path)
{
    return ScenarioFromJson(LoadJsonFile(path), path.parent_path());
}

void WriteLog(const ScenarioConfig& config,
              const std::vector<FrameRecord>& log,
              const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::trunc);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());

    Json header {
        { "type", "header" },
        { "rng_seed", config.mRngSeed },
        { "window", ToJson(config.mWindow) },
        { "raster", ToJson(config.mRaster) },
        { "world", ToJson(config.mWorld) },
        { "noise", ToJson(config.mNoise) },
        { "fusion", ToJson(config.mFusion) },
        { "update", ToJson(config.mUpdate) },
        { "tile_size", config.mTileSize },
    };
    file << header.dump() << '\n';

    for (const auto& record : log) {
        Json prior = Json::array();
        for (const auto& point : MaskToPoints(record.mPrior)) {
            const int bits = point.mBits[0] | (point.mBits[1] << 1) |
                             (point.mBits[2] << 2);
            prior.push_back(Json::array({ point.mCell.x(),
                                          point.mCell.y(), bits }));
        }
        Json frame {
            { "type", "frame" },
            { "frame", record.mFrameIndex },
            { "t", record.mTime },
            { "traj", record.mTrajectoryId },
            { "true_pose", PoseToJson(record.mTruePose) },
            { "noisy_pose", PoseToJson(record.mNoisyPose) },
            { "visited_fraction", record.mVisitedFraction },
            { "pred", ElementsToJson(record.mPrediction) },
            { "gt", ElementsToJson(record.mGroundTruth) },
            { "prior", std::move(prior) },
        };
        file << frame.dump() << '\n';
    }
    if (!file)
        throw std::runtime_error("write failed for " + path.string());
}

LogFile ReadLog(const std::filesystem::path& path)
{
    std::ifstream file(path);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());

    LogFile log;
    std::string line;
    bool haveHeader = false;
    while (std::getline(file, line)) {
        if (line.empty())
            continue;
        const Json j = Json::parse(line);
        const std::string type = j.value("type", "");
        if (type == "header") {
            log.mWindow = WindowSpecFromJson(j.at("window"));
            log.mRaster = RasterOptionsFromJson(j.at("raster"));
            log.mWorld = WorldFromJson(j.at("world"));
            log.mRngSeed = j.value("rng_seed", std::uint64_t { 0 });
            haveHeader = true;
        } else if (type == "frame") {
            if (!haveHeader)
                throw std::invalid_argument(
                    "log: frame record before header");
            FrameRecord record;
            record.mFrameIndex = j.at("frame").get<std::size_t>();
            record.mTime = j.at("t").get<double>();
            record.mTrajectoryId = j.at("traj").get<std::string>();
            record.mTruePose = PoseFromJson(j.at("true_pose"));
            record.mNoisyPose = PoseFromJson(j.at("noisy_pose"));
            record.mVisitedFraction =
                j.at("visited_fraction").get<double>();
            record.mPrediction =
                ElementsFromJson(j.at("pred"), MapFrame::Ego);
            record.mGroundTruth =
                ElementsFromJson(j.at("gt"), MapFrame::Ego);
            record.mPrior = LocalMask(log.mWindow);
            for (const auto& cell : j.at("prior")) {
                const int i = cell.at(0).get<int>();
                const int jj = cell.at(1).get<int>();
                const int bits = cell.at(2).get<int>();
                for (int c = 0; c < NumCategories; ++c)
                    if (bits & (1 << c))
                        record.mPrior.Set(i, jj, c);
            }
            log.mFrames.push_back(std::move(record));
        } else {
            throw std::invalid_argument("log: unknown record type");
        }
    }
    if (!haveHeader)
        throw std::invalid_argument("log: missing header record");
    return log;
}

void WriteSweepCsv(const SweepResult& sweep,
                   const std::filesystem::path& path)
{
    std::ofstream file(path, std::ios::trunc);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());

    const auto writeBlock = [&](const std::string& metric,
                                auto getter) {
        file << metric;
        for (const double sigmaT : sweep.mSigmaTs)
            file << ",sigma_t=" << sigmaT;
        file << '\n';
        for (std::size_t r = 0; r < sweep.mSigmaRs.size(); ++r) {
            file << "sigma_r=" << sweep.mSigmaRs[r];
            for (std::size_t t = 0; t < sweep.mSigmaTs.size(); ++t)
                file << ','
                     << getter(sweep.mCells[r * sweep.mSigmaTs.size()
                                            + t]);
            file << '\n';
        }
    };
    writeBlock("mAP", [](const SweepCell& c) { return c.mMeanAp; });
    writeBlock("mIoU",
               [](const SweepCell& c) { return c.mMeanIou; });
    if (!file)
        throw std::runtime_error("write failed for " + path.string());
}

} // namespace hrmap
