#ifndef HRMAP_RENDER_HPP
#define HRMAP_RENDER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hrmap/mapstore.hpp"

namespace hrmap {

struct Image
{
    int mWidth = 0;
    int mHeight = 0;
    std::vector<std::uint8_t> mPixels;  /* RGB8, row-major */

    Image() = default;
    Image(int width, int height, std::uint8_t fill = 255)
        : mWidth(width), mHeight(height),
          mPixels(static_cast<std::size_t>(width) * height * 3, fill) { }

    std::uint8_t* Pixel(int row, int col)
    {
        return this->mPixels.data() +
               (static_cast<std::size_t>(row) * this->mWidth + col) * 3;
    }
    const std::uint8_t* Pixel(int row, int col) const
    {
        return this->mPixels.data() +
               (static_cast<std::size_t>(row) * this->mWidth + col) * 3;
    }
};

/* Divider red, crossing green, boundary blue; white background;
 * multi-category cells additive-blended */
struct Palette
{
    std::array<std::array<std::uint8_t, 3>, NumCategories> mColors {{
        {{ 255, 0, 0 }}, {{ 0, 255, 0 }}, {{ 0, 0, 255 }} }};
};

enum class RenderMode : int
{
    Thresholded = 0,
    Evidence = 1,
};

/* One pixel per cell, ego-forward up, ego-left on the image left */
Image RenderMask(const LocalMask& mask,
                 const Palette& palette = Palette());

/* Allocated tile extent of the global map; Thresholded applies the
 * retrieval threshold per cell, Evidence maps the raw 0-255 value to
 * channel intensity */
Image RenderGlobal(const GlobalMap& map,
                   const Palette& palette = Palette(),
                   RenderMode mode = RenderMode::Thresholded);

void WritePng(const Image& image, const std::filesystem::path& path);

} // namespace hrmap

#endif // HRMAP_RENDER_HPP
