#include "hrmap/render.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <zlib.h>

namespace hrmap {

namespace {

void BlendCell(std::uint8_t* pixel, const Palette& palette,
               const std::array<int, NumCategories>& intensities)
{
    int r = 0, g = 0, b = 0;
    bool any = false;
    for (int c = 0; c < NumCategories; ++c) {
        if (intensities[c] <= 0)
            continue;
        any = true;
        r += intensities[c] * palette.mColors[c][0] / 255;
        g += intensities[c] * palette.mColors[c][1] / 255;
        b += intensities[c] * palette.mColors[c][2] / 255;
    }
    if (!any)
        return; /* keep white background */
    pixel[0] = static_cast<std::uint8_t>(std::min(255, r));
    pixel[1] = static_cast<std::uint8_t>(std::min(255, g));
    pixel[2] = static_cast<std::uint8_t>(std::min(255, b));
}

} // namespace

Image RenderMask(const LocalMask& mask, const Palette& palette)
{
    const int rows = mask.mWindow.Rows();
    const int cols = mask.mWindow.Cols();
    Image image(cols, rows);

    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            std::array<int, NumCategories> intensities {};
            for (int c = 0; c < NumCategories; ++c)
                intensities[c] = mask.At(i, j, c) ? 255 : 0;
            BlendCell(image.Pixel(rows - 1 - i, cols - 1 - j),
                      palette, intensities);
        }
    }
    return image;
}

Image RenderGlobal(const GlobalMap& map, const Palette& palette,
                   RenderMode mode)
{
    if (map.Tiles().empty())
        return Image(1, 1);

    const int ts = map.TileSize();
    int ixLo = map.Tiles().begin()->first.second;
    int ixHi = ixLo;
    int iyLo = map.Tiles().begin()->first.first;
    int iyHi = iyLo;
    for (const auto& [key, payload] : map.Tiles()) {
        iyLo = std::min(iyLo, key.first);
        iyHi = std::max(iyHi, key.first);
        ixLo = std::min(ixLo, key.second);
        ixHi = std::max(ixHi, key.second);
    }
    const int gxLo = ixLo * ts;
    const int gxHi = (ixHi + 1) * ts - 1;
    const int gyLo = iyLo * ts;
    const int gyHi = (iyHi + 1) * ts - 1;

    Image image(gyHi - gyLo + 1, gxHi - gxLo + 1);
    const std::uint8_t sTh = map.Params().mSThreshold;

    for (int gx = gxLo; gx <= gxHi; ++gx) {
        for (int gy = gyLo; gy <= gyHi; ++gy) {
            std::array<int, NumCategories> intensities {};
            for (int c = 0; c < NumCategories; ++c) {
                const std::uint8_t v = map.At(gx, gy, c);
                intensities[c] = mode == RenderMode::Thresholded
                    ? (v > sTh ? 255 : 0)
                    : static_cast<int>(v);
            }
            /* World x up, world y on the image left */
            BlendCell(image.Pixel(gxHi - gx, gyHi - gy), palette,
                      intensities);
        }
    }
    return image;
}

namespace {

void AppendU32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void AppendChunk(std::vector<std::uint8_t>& out, const char type[4],
                 const std::vector<std::uint8_t>& data)
{
    AppendU32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crcStart = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto checksum = static_cast<std::uint32_t>(crc32(
        0L, out.data() + crcStart,
        static_cast<uInt>(out.size() - crcStart)));
    AppendU32(out, checksum);
}

} // namespace

void WritePng(const Image& image, const std::filesystem::path& path)
{
    if (image.mWidth <= 0 || image.mHeight <= 0)
        throw std::invalid_argument("WritePng: empty image");

    std::vector<std::uint8_t> file {
        0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a };

    std::vector<std::uint8_t> ihdr;
    AppendU32(ihdr, static_cast<std::uint32_t>(image.mWidth));
    AppendU32(ihdr, static_cast<std::uint32_t>(image.mHeight));
    ihdr.push_back(8);  /* bit depth */
    ihdr.push_back(2);  /* RGB */
    ihdr.push_back(0);  /* deflate */
    ihdr.push_back(0);  /* adaptive filtering */
    ihdr.push_back(0);  /* no interlace */
    AppendChunk(file, "IHDR", ihdr);

    /* Scanlines with filter byte 0 */
    const std::size_t stride =
        static_cast<std::size_t>(image.mWidth) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * image.mHeight);
    for (int row = 0; row < image.mHeight; ++row) {
        raw.push_back(0);
        raw.insert(raw.end(),
                   image.mPixels.begin() + row * stride,
                   image.mPixels.begin() + (row + 1) * stride);
    }

    uLongf compressedSize = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressedSize);
    if (compress2(compressed.data(), &compressedSize, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("WritePng: deflate failed");
    compressed.resize(compressedSize);
    AppendChunk(file, "IDAT", compressed);
    AppendChunk(file, "IEND", {});

    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream)
        throw std::runtime_error(
            "WritePng: cannot open " + path.string());
    stream.write(reinterpret_cast<const char*>(file.data()),
                 static_cast<std::streamsize>(file.size()));
    if (!stream)
        throw std::runtime_error(
            "WritePng: write failed for " + path.string());
}

} // namespace hrmap
