#include "hrmap/mapstore.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <zlib.h>

namespace hrmap {

namespace {

constexpr char MagicBytes[4] = { 'H', 'R', 'M', 'P' };
constexpr std::uint16_t FormatVersion = 1;

inline int FloorDiv(int a, int b)
{
    const int q = a / b;
    return (a % b != 0 && (a ^ b) < 0) ? q - 1 : q;
}

template <typename T>
void AppendScalar(std::vector<std::uint8_t>& buf, T value)
{
    /* Little-endian on all supported targets */
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <typename T>
T ReadScalar(const std::vector<std::uint8_t>& buf, std::size_t& offset)
{
    if (offset + sizeof(T) > buf.size())
        throw MapFormatError("truncated payload");
    T value;
    std::memcpy(&value, buf.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

} // namespace

GlobalMap::GlobalMap(const GridSpec& grid, int tileSize,
                     const UpdateParams& params)
    : mGrid(grid), mTileSize(tileSize), mParams(params)
{
    if (tileSize <= 0)
        throw std::invalid_argument("GlobalMap: tile size must be > 0");
    params.Validate();
}

std::uint8_t GlobalMap::At(int gx, int gy, int channel) const
{
    const std::uint8_t* cell = this->CellPointerOrNull(gx, gy);
    return cell != nullptr
        ? cell[channel * this->mTileSize * this->mTileSize] : 0;
}

const std::uint8_t* GlobalMap::CellPointerOrNull(int gx, int gy) const
{
    const int ts = this->mTileSize;
    const TileKey key { FloorDiv(gy, ts), FloorDiv(gx, ts) };
    const auto it = this->mTiles.find(key);
    if (it == this->mTiles.end())
        return nullptr;
    const int lx = gx - key.second * ts;
    const int ly = gy - key.first * ts;
    return it->second.data() + ly * ts + lx;
}

std::uint8_t* GlobalMap::CellPointer(int gx, int gy)
{
    const int ts = this->mTileSize;
    const TileKey key { FloorDiv(gy, ts), FloorDiv(gx, ts) };
    auto it = this->mTiles.find(key);
    if (it == this->mTiles.end()) {
        it = this->mTiles.emplace(key, TilePayload(
            static_cast<std::size_t>(ts) * ts * NumCategories, 0)).first;
    }
    const int lx = gx - key.second * ts;
    const int ly = gy - key.first * ts;
    return it->second.data() + ly * ts + lx;
}

void GlobalMap::CheckResolution(const WindowSpec& window) const
{
    if (std::abs(window.mResolution - this->mGrid.mResolution) > 1e-12)
        throw std::invalid_argument(
            "GlobalMap: window resolution does not match map resolution");
}

std::size_t GlobalMap::Update(const LocalMask& mask, const Pose2& pose)
{
    this->CheckResolution(mask.mWindow);
    if (!pose.IsFinite())
        throw std::invalid_argument("GlobalMap::Update: non-finite pose");

    const WindowSpec& window = mask.mWindow;
    const int planeStride = this->mTileSize * this->mTileSize;

    /* Bounding box of the rotated window in the world frame */
    const Point2 corners[4] = {
        SE2Apply(pose, Point2(window.mXMin, window.mYMin)),
        SE2Apply(pose, Point2(window.mXMin, window.mYMax)),
        SE2Apply(pose, Point2(window.mXMax, window.mYMin)),
        SE2Apply(pose, Point2(window.mXMax, window.mYMax)),
    };
    Point2 lo = corners[0];
    Point2 hi = corners[0];
    for (const auto& c : corners) {
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    const CellIndex gLo = MetricToCell(lo, this->mGrid) - CellIndex(1, 1);
    const CellIndex gHi = MetricToCell(hi, this->mGrid) + CellIndex(1, 1);

    const std::uint8_t sPlus = this->mParams.mSPlus;
    const std::uint8_t sMinus = this->mParams.mSMinus;
    std::size_t touched = 0;

    /* Gather: each global cell in the box is visited exactly once and
     * pulls its value from the local cell its center maps back to */
    for (int gy = gLo.y(); gy <= gHi.y(); ++gy) {
        for (int gx = gLo.x(); gx <= gHi.x(); ++gx) {
            const Point2 center =
                CellCenter(CellIndex(gx, gy), this->mGrid);
            const Point2 local = SE2InverseApply(pose, center);
            const CellIndex idx = LocalCellOf(local, window);
            if (!LocalCellInRange(idx, window))
                continue;
            std::uint8_t* cell = this->CellPointer(gx, gy);
            for (int c = 0; c < NumCategories; ++c) {
                std::uint8_t& value = cell[c * planeStride];
                if (mask.At(idx.x(), idx.y(), c))
                    value = static_cast<std::uint8_t>(
                        std::min<int>(255, value + sPlus));
                else
                    value = static_cast<std::uint8_t>(
                        std::max<int>(0, value - sMinus));
            }
            ++touched;
        }
    }
    return touched;
}

LocalMask GlobalMap::Retrieve(const Pose2& pose,
                              const WindowSpec& window) const
{
    this->CheckResolution(window);
    if (!pose.IsFinite())
        throw std::invalid_argument("GlobalMap::Retrieve: non-finite pose");

    LocalMask mask(window);
    const int planeStride = this->mTileSize * this->mTileSize;
    const std::uint8_t sTh = this->mParams.mSThreshold;
    const int rows = window.Rows();
    const int cols = window.Cols();

    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const Point2 world =
                SE2Apply(pose, LocalCellCenter(i, j, window));
            const CellIndex g = MetricToCell(world, this->mGrid);
            const std::uint8_t* cell =
                this->CellPointerOrNull(g.x(), g.y());
            if (cell == nullptr)
                continue;
            for (int c = 0; c < NumCategories; ++c)
                if (cell[c * planeStride] > sTh)
                    mask.Set(i, j, c);
        }
    }
    return mask;
}

void GlobalMap::Merge(const GlobalMap& src)
{
    if (!(this->mGrid == src.mGrid) || this->mTileSize != src.mTileSize)
        throw std::invalid_argument(
            "GlobalMap::Merge: grid spec or tile size mismatch");

    for (const auto& [key, payload] : src.mTiles) {
        auto it = this->mTiles.find(key);
        if (it == this->mTiles.end()) {
            this->mTiles.emplace(key, payload);
            continue;
        }
        TilePayload& dst = it->second;
        for (std::size_t k = 0; k < payload.size(); ++k)
            dst[k] = static_cast<std::uint8_t>(
                std::min<int>(255, dst[k] + payload[k]));
    }
}

MemoryStats GlobalMap::MemoryStatistics() const
{
    MemoryStats stats;
    stats.mAllocatedTiles = this->mTiles.size();
    stats.mStoredBytes = this->mTiles.size() *
        static_cast<std::size_t>(this->mTileSize) * this->mTileSize *
        NumCategories;
    stats.mIndexOverheadBytes =
        this->mTiles.size() * (sizeof(TileKey) + sizeof(TilePayload));

    if (!this->mTiles.empty()) {
        int ixLo = this->mTiles.begin()->first.second;
        int ixHi = ixLo;
        int iyLo = this->mTiles.begin()->first.first;
        int iyHi = iyLo;
        for (const auto& [key, payload] : this->mTiles) {
            iyLo = std::min(iyLo, key.first);
            iyHi = std::max(iyHi, key.first);
            ixLo = std::min(ixLo, key.second);
            ixHi = std::max(ixHi, key.second);
        }
        const double tileMeters = this->mTileSize * this->mGrid.mResolution;
        stats.mVisitedExtentM2 = (ixHi - ixLo + 1) * tileMeters *
                                 (iyHi - iyLo + 1) * tileMeters;
    }
    return stats;
}

std::vector<std::uint8_t> GlobalMap::Serialize() const
{
    std::vector<std::uint8_t> buf;
    buf.reserve(48 + this->mTiles.size() *
        (8 + static_cast<std::size_t>(this->mTileSize) *
             this->mTileSize * NumCategories));

    buf.insert(buf.end(), MagicBytes, MagicBytes + 4);
    AppendScalar<std::uint16_t>(buf, FormatVersion);
    AppendScalar<std::uint16_t>(buf, 0);
    AppendScalar<double>(buf, this->mGrid.mResolution);
    AppendScalar<double>(buf, this->mGrid.mOrigin.x());
    AppendScalar<double>(buf, this->mGrid.mOrigin.y());
    AppendScalar<std::uint32_t>(buf,
        static_cast<std::uint32_t>(this->mTileSize));
    AppendScalar<std::uint8_t>(buf, NumCategories);
    AppendScalar<std::uint8_t>(buf, this->mParams.mSPlus);
    AppendScalar<std::uint8_t>(buf, this->mParams.mSMinus);
    AppendScalar<std::uint8_t>(buf, this->mParams.mSThreshold);
    AppendScalar<std::uint64_t>(buf, this->mTiles.size());

    /* std::map iteration is already (tile_iy, tile_ix) lexicographic */
    for (const auto& [key, payload] : this->mTiles) {
        AppendScalar<std::int32_t>(buf, key.second);
        AppendScalar<std::int32_t>(buf, key.first);
        buf.insert(buf.end(), payload.begin(), payload.end());
    }

    const auto checksum = static_cast<std::uint32_t>(
        crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
    AppendScalar<std::uint32_t>(buf, checksum);
    return buf;
}

void GlobalMap::Save(const std::filesystem::path& path) const
{
    const auto bytes = this->Serialize();
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw std::runtime_error(
            "GlobalMap::Save: cannot open " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!file)
        throw std::runtime_error(
            "GlobalMap::Save: write failed for " + path.string());
}

GlobalMap GlobalMap::Deserialize(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 52)
        throw MapFormatError("truncated payload");

    const std::size_t bodyEnd = bytes.size() - 4;
    std::uint32_t storedCrc;
    std::memcpy(&storedCrc, bytes.data() + bodyEnd, 4);
    const auto actualCrc = static_cast<std::uint32_t>(
        crc32(0L, bytes.data(), static_cast<uInt>(bodyEnd)));

    std::size_t offset = 0;
    if (std::memcmp(bytes.data(), MagicBytes, 4) != 0)
        throw MapFormatError("bad magic");
    offset += 4;

    const auto version = ReadScalar<std::uint16_t>(bytes, offset);
    if (version != FormatVersion)
        throw MapFormatError("unsupported version");
    ReadScalar<std::uint16_t>(bytes, offset); /* reserved */

    const double resolution = ReadScalar<double>(bytes, offset);
    const double originX = ReadScalar<double>(bytes, offset);
    const double originY = ReadScalar<double>(bytes, offset);
    const auto tileSize = ReadScalar<std::uint32_t>(bytes, offset);
    const auto channels = ReadScalar<std::uint8_t>(bytes, offset);
    if (channels != NumCategories)
        throw MapFormatError("unsupported channel count");
    UpdateParams params;
    params.mSPlus = ReadScalar<std::uint8_t>(bytes, offset);
    params.mSMinus = ReadScalar<std::uint8_t>(bytes, offset);
    params.mSThreshold = ReadScalar<std::uint8_t>(bytes, offset);
    const auto tileCount = ReadScalar<std::uint64_t>(bytes, offset);

    if (!(resolution > 0.0) || tileSize == 0)
        throw MapFormatError("invalid header fields");

    GlobalMap map(GridSpec(Point2(originX, originY), resolution),
                  static_cast<int>(tileSize), params);

    const std::size_t payloadSize =
        static_cast<std::size_t>(tileSize) * tileSize * NumCategories;
    TileKey previous;
    for (std::uint64_t n = 0; n < tileCount; ++n) {
        const auto tileIx = ReadScalar<std::int32_t>(bytes, offset);
        const auto tileIy = ReadScalar<std::int32_t>(bytes, offset);
        if (offset + payloadSize > bodyEnd)
            throw MapFormatError("truncated payload");
        const TileKey key { tileIy, tileIx };
        if (n > 0) {
            if (key == previous)
                throw MapFormatError("duplicate tile index");
            if (key < previous)
                throw MapFormatError("tile index order violation");
        }
        previous = key;
        map.mTiles.emplace(key, TilePayload(
            bytes.begin() + static_cast<std::ptrdiff_t>(offset),
            bytes.begin() + static_cast<std::ptrdiff_t>(offset +
                                                        payloadSize)));
        offset += payloadSize;
    }

    if (offset != bodyEnd)
        throw MapFormatError("trailing bytes after tile records");
    if (storedCrc != actualCrc)
        throw MapFormatError("checksum mismatch");
    return map;
}

GlobalMap GlobalMap::Load(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error(
            "GlobalMap::Load: cannot open " + path.string());
    std::vector<std::uint8_t> bytes(
        (std::istreambuf_iterator<char>(file)),
        std::istreambuf_iterator<char>());
    return Deserialize(bytes);
}

} // namespace hrmap
