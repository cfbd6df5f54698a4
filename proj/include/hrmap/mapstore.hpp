#ifndef HRMAP_MAPSTORE_HPP
#define HRMAP_MAPSTORE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "hrmap/raster.hpp"

namespace hrmap {

/* Evidence update parameters for the global map */
struct UpdateParams
{
    std::uint8_t mSPlus = 30;
    std::uint8_t mSMinus = 1;
    std::uint8_t mSThreshold = 0;

    void Validate() const
    {
        if (this->mSPlus == 0)
            throw std::invalid_argument("UpdateParams: s_plus must be > 0");
        if (this->mSPlus <= this->mSThreshold)
            throw std::invalid_argument(
                "UpdateParams: s_plus must exceed s_th");
    }

    bool operator==(const UpdateParams&) const = default;
};

struct MemoryStats
{
    std::size_t mAllocatedTiles = 0;
    std::size_t mStoredBytes = 0;
    std::size_t mIndexOverheadBytes = 0;
    double mVisitedExtentM2 = 0.0;
};

/* Global historical rasterized map: sparse tiles of 8-bit evidence
 * values, three channels per cell. Tiles are allocated lazily on the
 * first update that touches them; reads never allocate.
 *
 * Single-writer, multiple-reader: Update/Merge must be externally
 * serialized; Retrieve/MemoryStatistics/Save may run concurrently with
 * each other but not with a writer. */
class GlobalMap
{
public:
    /* Tile key is (tile_iy, tile_ix) so that the natural map order is
     * the serialization order */
    using TileKey = std::pair<int, int>;
    using TilePayload = std::vector<std::uint8_t>;

    explicit GlobalMap(const GridSpec& grid = GridSpec(),
                       int tileSize = 256,
                       const UpdateParams& params = UpdateParams());

    const GridSpec& Grid() const { return this->mGrid; }
    int TileSize() const { return this->mTileSize; }
    const UpdateParams& Params() const { return this->mParams; }
    const std::map<TileKey, TilePayload>& Tiles() const
        { return this->mTiles; }

    /* Cell value; 0 when the tile is unallocated */
    std::uint8_t At(int gx, int gy, int channel) const;

    /* Fold a local mask into the map at the given pose (gather over the
     * global cells covered by the rotated window). Returns the number
     * of global cells touched. */
    std::size_t Update(const LocalMask& mask, const Pose2& pose);

    /* Thresholded local mask read back at the given pose */
    LocalMask Retrieve(const Pose2& pose, const WindowSpec& window) const;

    /* Saturating per-cell evidence addition of another map */
    void Merge(const GlobalMap& src);

    MemoryStats MemoryStatistics() const;

    void Save(const std::filesystem::path& path) const;
    std::vector<std::uint8_t> Serialize() const;
    static GlobalMap Load(const std::filesystem::path& path);
    static GlobalMap Deserialize(const std::vector<std::uint8_t>& bytes);

    bool operator==(const GlobalMap& other) const
    {
        return this->mGrid == other.mGrid &&
               this->mTileSize == other.mTileSize &&
               this->mParams == other.mParams &&
               this->mTiles == other.mTiles;
    }

private:
    void CheckResolution(const WindowSpec& window) const;
    std::uint8_t* CellPointer(int gx, int gy); /* allocates */
    const std::uint8_t* CellPointerOrNull(int gx, int gy) const;

    GridSpec mGrid;
    int mTileSize;
    UpdateParams mParams;
    std::map<TileKey, TilePayload> mTiles;
};

/* Format error raised by Load/Deserialize */
class MapFormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace hrmap

#endif // HRMAP_MAPSTORE_HPP
