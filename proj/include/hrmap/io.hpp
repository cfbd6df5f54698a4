#ifndef HRMAP_IO_HPP
#define HRMAP_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrmap/eval.hpp"
#include "hrmap/simulate.hpp"

namespace hrmap {

using Json = nlohmann::json;

Json ToJson(const WorldParams& params);
WorldParams WorldParamsFromJson(const Json& j);
Json ToJson(const World& world);
World WorldFromJson(const Json& j);
Json ToJson(const Trajectory& traj);
Trajectory TrajectoryFromJson(const Json& j);
Json ToJson(const WindowSpec& window);
WindowSpec WindowSpecFromJson(const Json& j);
Json ToJson(const NoiseParams& noise);
NoiseParams NoiseParamsFromJson(const Json& j);
Json ToJson(const FusionPolicy& fusion);
FusionPolicy FusionPolicyFromJson(const Json& j);
Json ToJson(const UpdateParams& params);
UpdateParams UpdateParamsFromJson(const Json& j);
Json ToJson(const RasterOptions& options);
RasterOptions RasterOptionsFromJson(const Json& j);
Json ToJson(const EvalReport& report);

TrajectoryKind TrajectoryKindFromName(const std::string& name);

/* Scenario file: inline world/trajectory generation specs or file
 * references, resolved relative to the scenario file's directory */
ScenarioConfig LoadScenario(const std::filesystem::path& path);
ScenarioConfig ScenarioFromJson(const Json& j,
                                const std::filesystem::path& baseDir);

void SaveJson(const Json& j, const std::filesystem::path& path);
Json LoadJsonFile(const std::filesystem::path& path);

/* Newline-delimited JSON log: one header record, then one record per
 * frame with the prior mask stored sparsely */
struct LogFile
{
    WindowSpec mWindow;
    RasterOptions mRaster;
    World mWorld;
    std::uint64_t mRngSeed = 0;
    std::vector<FrameRecord> mFrames;
};

void WriteLog(const ScenarioConfig& config,
              const std::vector<FrameRecord>& log,
              const std::filesystem::path& path);
LogFile ReadLog(const std::filesystem::path& path);

void WriteSweepCsv(const SweepResult& sweep,
                   const std::filesystem::path& path);

} // namespace hrmap

#endif // HRMAP_IO_HPP
