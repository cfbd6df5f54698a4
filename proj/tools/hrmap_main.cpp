#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrmap/eval.hpp"
#include "hrmap/io.hpp"
#include "hrmap/render.hpp"

namespace {

using namespace hrmap;

constexpr int ExitOk = 0;
constexpr int ExitValidation = 1;
constexpr int ExitIo = 2;

std::vector<double> ParseDoubleList(const std::string& csv)
{
    std::vector<double> out;
    std::stringstream stream(csv);
    std::string token;
    while (std::getline(stream, token, ','))
        out.push_back(std::stod(token));
    if (out.empty())
        throw std::invalid_argument("empty list: " + csv);
    return out;
}

int CmdGenWorld(std::uint64_t seed, const std::string& paramsPath,
                const std::string& outPath)
{
    WorldParams params;
    if (!paramsPath.empty())
        params = WorldParamsFromJson(LoadJsonFile(paramsPath));
    const World world = GenerateWorld(seed, params);
    SaveJson(ToJson(world), outPath);
    std::cout << "world: " << world.mGtMap.mElements.size()
              << " elements\n";
    return ExitOk;
}

int CmdGenTraj(const std::string& worldPath, std::uint64_t seed,
               const std::string& kind, const std::string& id,
               const std::string& outPath)
{
    const World world = WorldFromJson(LoadJsonFile(worldPath));
    const Trajectory traj = GenerateTrajectory(
        world, seed, TrajectoryKindFromName(kind), id);
    SaveJson(ToJson(traj), outPath);
    std::cout << "trajectory: " << traj.mPoses.size() << " poses\n";
    return ExitOk;
}

int CmdRun(const std::string& scenarioPath, const std::string& mapOut,
           const std::string& logOut, const std::string& initialMap)
{
    ScenarioConfig config = LoadScenario(scenarioPath);
    if (!initialMap.empty())
        config.mInitialMapPath = initialMap;
    const ScenarioResult result = RunScenario(config);
    result.mMap.Save(mapOut);
    WriteLog(config, result.mLog, logOut);
    const MemoryStats stats = result.mMap.MemoryStatistics();
    std::cout << "frames: " << result.mLog.size()
              << "  tiles: " << stats.mAllocatedTiles
              << "  stored_bytes: " << stats.mStoredBytes << '\n';
    return ExitOk;
}

int CmdEval(const std::string& logPath, const std::string& mapPath,
            const std::string& outPath)
{
    const LogFile log = ReadLog(logPath);
    ApConfig apConfig;
    EvalReport report = MapScore(log.mFrames, apConfig, log.mRaster);
    report.mRevisit = RevisitDelta(log.mFrames, apConfig);
    Json j;
    if (!mapPath.empty()) {
        const GlobalMap map = GlobalMap::Load(mapPath);
        report.mMemory = map.MemoryStatistics();
        report.mHasMemory = true;
        j = ToJson(report);
        j["map_mIoU"] = MapQualityMiou(map, log.mWorld, log.mFrames,
                                       log.mWindow, log.mRaster);
    } else {
        j = ToJson(report);
    }
    SaveJson(j, outPath);
    std::cout << "mAP: " << report.mMeanAp
              << "  mIoU: " << report.mMeanIou << '\n';
    return ExitOk;
}

int CmdSweep(const std::string& scenarioPath, const std::string& sigmaT,
             const std::string& sigmaR, const std::string& outPath)
{
    const ScenarioConfig config = LoadScenario(scenarioPath);
    const SweepResult sweep = NoiseSweep(
        config, ParseDoubleList(sigmaT), ParseDoubleList(sigmaR));
    WriteSweepCsv(sweep, outPath);
    std::cout << "sweep: " << sweep.mCells.size() << " cells\n";
    return ExitOk;
}

int CmdRender(const std::string& mapPath, const std::string& mode,
              const std::string& outPath)
{
    const GlobalMap map = GlobalMap::Load(mapPath);
    RenderMode renderMode;
    if (mode == "thresholded")
        renderMode = RenderMode::Thresholded;
    else if (mode == "evidence")
        renderMode = RenderMode::Evidence;
    else
        throw std::invalid_argument("unknown render mode: " + mode);
    const Image image = RenderGlobal(map, Palette(), renderMode);
    WritePng(image, outPath);
    std::cout << "image: " << image.mWidth << "x" << image.mHeight
              << '\n';
    return ExitOk;
}

int CmdInspect(const std::string& mapPath)
{
    const GlobalMap map = GlobalMap::Load(mapPath);
    const MemoryStats stats = map.MemoryStatistics();
    std::cout << "resolution: " << map.Grid().mResolution << '\n'
              << "origin: (" << map.Grid().mOrigin.x() << ", "
              << map.Grid().mOrigin.y() << ")\n"
              << "tile_size: " << map.TileSize() << '\n'
              << "s_plus: " << int(map.Params().mSPlus)
              << "  s_minus: " << int(map.Params().mSMinus)
              << "  s_th: " << int(map.Params().mSThreshold) << '\n'
              << "tiles: " << stats.mAllocatedTiles << '\n'
              << "stored_bytes: " << stats.mStoredBytes << '\n'
              << "visited_extent_m2: " << stats.mVisitedExtentM2
              << '\n';

    std::size_t nonzero[NumCategories] = { 0, 0, 0 };
    const int ts = map.TileSize();
    for (const auto& [key, payload] : map.Tiles())
        for (int c = 0; c < NumCategories; ++c)
            for (int k = 0; k < ts * ts; ++k)
                if (payload[static_cast<std::size_t>(c) * ts * ts + k])
                    ++nonzero[c];
    for (int c = 0; c < NumCategories; ++c)
        std::cout << "nonzero_cells[" << CategoryName(
                         static_cast<Category>(c))
                  << "]: " << nonzero[c] << '\n';
    return ExitOk;
}

int CmdMerge(const std::string& inputs, const std::string& outPath)
{
    std::vector<std::string> paths;
    std::stringstream stream(inputs);
    std::string token;
    while (std::getline(stream, token, ','))
        paths.push_back(token);
    if (paths.empty())
        throw std::invalid_argument("merge: no input maps");

    GlobalMap merged = GlobalMap::Load(paths[0]);
    for (std::size_t k = 1; k < paths.size(); ++k)
        merged.Merge(GlobalMap::Load(paths[k]));
    merged.Save(outPath);
    std::cout << "tiles: " << merged.MemoryStatistics().mAllocatedTiles
              << '\n';
    return ExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Historical rasterized map engine" };
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string paramsPath, outPath, worldPath, kind = "loop";
    std::string id = "veh0";
    std::string scenarioPath, mapOut, logOut, initialMap;
    std::string logPath, mapPath, mode = "thresholded";
    std::string sigmaT = "0", sigmaR = "0", inputs;

    auto* genWorld = app.add_subcommand("gen-world",
        "Generate a synthetic world");
    genWorld->add_option("--seed", seed);
    genWorld->add_option("--params", paramsPath);
    genWorld->add_option("--out", outPath)->required();

    auto* genTraj = app.add_subcommand("gen-traj",
        "Generate a trajectory through a world");
    genTraj->add_option("--world", worldPath)->required();
    genTraj->add_option("--seed", seed);
    genTraj->add_option("--kind", kind)
        ->check(CLI::IsMember({ "loop", "outback", "grid" }));
    genTraj->add_option("--id", id);
    genTraj->add_option("--out", outPath)->required();

    auto* run = app.add_subcommand("run",
        "Run a closed-loop scenario");
    run->add_option("--scenario", scenarioPath)->required();
    run->add_option("--map-out", mapOut)->required();
    run->add_option("--log-out", logOut)->required();
    run->add_option("--initial-map", initialMap);

    auto* eval = app.add_subcommand("eval",
        "Evaluate a scenario log");
    eval->add_option("--log", logPath)->required();
    eval->add_option("--map", mapPath);
    eval->add_option("--out", outPath)->required();

    auto* sweep = app.add_subcommand("sweep",
        "Noise sweep over (sigma_t, sigma_r)");
    sweep->add_option("--scenario", scenarioPath)->required();
    sweep->add_option("--sigma-t", sigmaT);
    sweep->add_option("--sigma-r", sigmaR);
    sweep->add_option("--out", outPath)->required();

    auto* render = app.add_subcommand("render",
        "Render a global map to PNG");
    render->add_option("--map", mapPath)->required();
    render->add_option("--mode", mode)
        ->check(CLI::IsMember({ "thresholded", "evidence" }));
    render->add_option("--out", outPath)->required();

    auto* inspect = app.add_subcommand("inspect",
        "Print map file header and statistics");
    inspect->add_option("--map", mapPath)->required();

    auto* merge = app.add_subcommand("merge",
        "Merge map files by saturating evidence addition");
    merge->add_option("--in", inputs)->required();
    merge->add_option("--out", outPath)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (genWorld->parsed())
            return CmdGenWorld(seed, paramsPath, outPath);
        if (genTraj->parsed())
            return CmdGenTraj(worldPath, seed, kind, id, outPath);
        if (run->parsed())
            return CmdRun(scenarioPath, mapOut, logOut, initialMap);
        if (eval->parsed())
            return CmdEval(logPath, mapPath, outPath);
        if (sweep->parsed())
            return CmdSweep(scenarioPath, sigmaT, sigmaR, outPath);
        if (render->parsed())
            return CmdRender(mapPath, mode, outPath);
        if (inspect->parsed())
            return CmdInspect(mapPath);
        if (merge->parsed())
            return CmdMerge(inputs, outPath);
    } catch (const MapFormatError& e) {
        std::cerr << "map format error: " << e.what() << '\n';
        return ExitIo;
    } catch (const Json::exception& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return ExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return ExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return ExitIo;
    }
    return ExitValidation;
}
