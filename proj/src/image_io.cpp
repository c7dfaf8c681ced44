#include "pathnav/image_io.hpp"

#include <zlib.h>

#include <cstring>

#include "pathnav/errors.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

namespace {

const std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

std::uint32_t get_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::uint8_t* data, std::size_t size) {
  put_be32(out, std::uint32_t(size));
  std::size_t crc_begin = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data, data + size);
  std::uint32_t crc = std::uint32_t(
      ::crc32(0, out.data() + crc_begin, uInt(out.size() - crc_begin)));
  put_be32(out, crc);
}

std::vector<std::uint8_t> zlib_deflate(const std::uint8_t* data,
                                       std::size_t size) {
  uLongf bound = compressBound(uLong(size));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, data, uLong(size), 6) != Z_OK) {
    throw Error(Errc::unreadable_raster, "deflate failed");
  }
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data,
                                       std::size_t size,
                                       std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf out_size = uLongf(expected);
  int rc = uncompress(out.data(), &out_size, data, uLong(size));
  if (rc != Z_OK || out_size != expected) {
    throw Error(Errc::unreadable_raster, "corrupt PNG stream");
  }
  return out;
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

std::uint16_t get_u16(const std::uint8_t* p, bool le) {
  return le ? std::uint16_t(p[0] | (p[1] << 8))
            : std::uint16_t((p[0] << 8) | p[1]);
}

std::uint32_t get_u32(const std::uint8_t* p, bool le) {
  return le ? (std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
               (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24))
            : get_be32(p);
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 24));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw Error(Errc::invalid_args, "encode of empty image");
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kPngSig, kPngSig + 8);

  std::uint8_t ihdr[13];
  ihdr[0] = std::uint8_t(std::uint32_t(image.width) >> 24);
  ihdr[1] = std::uint8_t(std::uint32_t(image.width) >> 16);
  ihdr[2] = std::uint8_t(std::uint32_t(image.width) >> 8);
  ihdr[3] = std::uint8_t(image.width);
  ihdr[4] = std::uint8_t(std::uint32_t(image.height) >> 24);
  ihdr[5] = std::uint8_t(std::uint32_t(image.height) >> 16);
  ihdr[6] = std::uint8_t(std::uint32_t(image.height) >> 8);
  ihdr[7] = std::uint8_t(image.height);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // truecolor
  ihdr[10] = 0;  // deflate
  ihdr[11] = 0;  // adaptive filtering
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, sizeof(ihdr));

  const std::size_t row_bytes = std::size_t(image.width) * 3;
  std::vector<std::uint8_t> raw((row_bytes + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    std::uint8_t* dst = raw.data() + std::size_t(y) * (row_bytes + 1);
    dst[0] = 0;  // filter: none
    std::memcpy(dst + 1, image.px(0, y), row_bytes);
  }
  std::vector<std::uint8_t> idat = zlib_deflate(raw.data(), raw.size());
  append_chunk(out, "IDAT", idat.data(), idat.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

Image decode_png(const std::uint8_t* data, std::size_t size) {
  if (size < 8 || std::memcmp(data, kPngSig, 8) != 0) {
    throw Error(Errc::unreadable_raster, "not a PNG file");
  }
  std::size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> idat;
  bool seen_ihdr = false, seen_iend = false;

  while (pos + 8 <= size && !seen_iend) {
    std::uint32_t len = get_be32(data + pos);
    if (pos + 12 + len > size) {
      throw Error(Errc::unreadable_raster, "truncated PNG chunk");
    }
    const char* type = reinterpret_cast<const char*>(data + pos + 4);
    const std::uint8_t* body = data + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw Error(Errc::unreadable_raster, "bad IHDR");
      width = int(get_be32(body));
      height = int(get_be32(body + 4));
      bit_depth = body[8];
      color_type = body[9];
      if (body[12] != 0) {
        throw Error(Errc::unreadable_raster, "interlaced PNG unsupported");
      }
      seen_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), body, body + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  if (!seen_ihdr || width <= 0 || height <= 0) {
    throw Error(Errc::unreadable_raster, "missing PNG header");
  }
  if (bit_depth != 8) {
    throw Error(Errc::unreadable_raster, "only 8-bit PNG supported");
  }
  int channels;
  switch (color_type) {
    case 0: channels = 1; break;
    case 2: channels = 3; break;
    case 4: channels = 2; break;
    case 6: channels = 4; break;
    default:
      throw Error(Errc::unreadable_raster, "palette PNG unsupported");
  }

  const std::size_t row_bytes = std::size_t(width) * channels;
  std::vector<std::uint8_t> raw =
      zlib_inflate(idat.data(), idat.size(), (row_bytes + 1) * height);

  // Undo per-row filters in place.
  std::vector<std::uint8_t> prev(row_bytes, 0);
  Image out;
  out.width = width;
  out.height = height;
  out.data.resize(std::size_t(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    std::uint8_t* row = raw.data() + std::size_t(y) * (row_bytes + 1);
    std::uint8_t filter = row[0];
    std::uint8_t* cur = row + 1;
    for (std::size_t i = 0; i < row_bytes; ++i) {
      int a = i >= std::size_t(channels) ? cur[i - channels] : 0;
      int b = prev[i];
      int c = i >= std::size_t(channels) ? prev[i - channels] : 0;
      int x = cur[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default:
          throw Error(Errc::unreadable_raster, "bad PNG filter type");
      }
      cur[i] = std::uint8_t(x);
    }
    std::memcpy(prev.data(), cur, row_bytes);

    std::uint8_t* dst = out.px(0, y);
    for (int x = 0; x < width; ++x) {
      const std::uint8_t* s = cur + std::size_t(x) * channels;
      switch (channels) {
        case 1: dst[0] = dst[1] = dst[2] = s[0]; break;
        case 2: dst[0] = dst[1] = dst[2] = s[0]; break;
        case 3: dst[0] = s[0]; dst[1] = s[1]; dst[2] = s[2]; break;
        case 4: dst[0] = s[0]; dst[1] = s[1]; dst[2] = s[2]; break;
      }
      dst += 3;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_tiff(const Image& image) {
  if (image.empty()) throw Error(Errc::invalid_args, "encode of empty image");
  std::vector<std::uint8_t> out;
  out.reserve(image.data.size() + 256);
  out.push_back('I');
  out.push_back('I');
  put_u16le(out, 42);
  put_u32le(out, 8);  // first IFD right after the header

  const int n_entries = 10;
  const std::uint32_t ifd_off = 8;
  const std::uint32_t bits_off = ifd_off + 2 + n_entries * 12 + 4;
  const std::uint32_t data_off = bits_off + 6;

  put_u16le(out, n_entries);
  auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count,
                   std::uint32_t value) {
    put_u16le(out, tag);
    put_u16le(out, type);
    put_u32le(out, count);
    put_u32le(out, value);
  };
  const std::uint32_t strip_bytes = std::uint32_t(image.data.size());
  entry(256, 3, 1, std::uint32_t(image.width));    // ImageWidth
  entry(257, 3, 1, std::uint32_t(image.height));   // ImageLength
  entry(258, 3, 3, bits_off);                      // BitsPerSample
  entry(259, 3, 1, 1);                             // Compression: none
  entry(262, 3, 1, 2);                             // Photometric: RGB
  entry(273, 4, 1, data_off);                      // StripOffsets
  entry(277, 3, 1, 3);                             // SamplesPerPixel
  entry(278, 3, 1, std::uint32_t(image.height));   // RowsPerStrip
  entry(279, 4, 1, strip_bytes);                   // StripByteCounts
  entry(284, 3, 1, 1);                             // PlanarConfig: chunky
  put_u32le(out, 0);                               // no next IFD
  put_u16le(out, 8);
  put_u16le(out, 8);
  put_u16le(out, 8);
  out.insert(out.end(), image.data.begin(), image.data.end());
  return out;
}

Image decode_tiff(const std::uint8_t* data, std::size_t size) {
  if (size < 8) throw Error(Errc::unreadable_raster, "not a TIFF file");
  bool le;
  if (data[0] == 'I' && data[1] == 'I') {
    le = true;
  } else if (data[0] == 'M' && data[1] == 'M') {
    le = false;
  } else {
    throw Error(Errc::unreadable_raster, "not a TIFF file");
  }
  if (get_u16(data + 2, le) != 42) {
    throw Error(Errc::unreadable_raster, "bad TIFF magic");
  }
  std::uint32_t ifd = get_u32(data + 4, le);
  if (ifd + 2 > size) throw Error(Errc::unreadable_raster, "truncated TIFF");
  std::uint16_t n = get_u16(data + ifd, le);
  if (ifd + 2 + std::size_t(n) * 12 + 4 > size) {
    throw Error(Errc::unreadable_raster, "truncated TIFF IFD");
  }

  std::uint32_t width = 0, height = 0, compression = 1, spp = 1;
  std::uint32_t rows_per_strip = 0xffffffffu, planar = 1;
  std::vector<std::uint32_t> strip_offsets, strip_counts;
  std::uint32_t bits = 8;

  auto read_values = [&](std::uint16_t type, std::uint32_t count,
                         const std::uint8_t* field) {
    std::vector<std::uint32_t> vals;
    std::size_t elem = type == 3 ? 2 : 4;
    const std::uint8_t* src = field;
    if (elem * count > 4) {
      std::uint32_t off = get_u32(field, le);
      if (off + elem * count > size) {
        throw Error(Errc::unreadable_raster, "TIFF value out of range");
      }
      src = data + off;
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      vals.push_back(type == 3 ? get_u16(src + i * 2, le)
                               : get_u32(src + i * 4, le));
    }
    return vals;
  };

  for (std::uint16_t i = 0; i < n; ++i) {
    const std::uint8_t* e = data + ifd + 2 + std::size_t(i) * 12;
    std::uint16_t tag = get_u16(e, le);
    std::uint16_t type = get_u16(e + 2, le);
    std::uint32_t count = get_u32(e + 4, le);
    if (type != 3 && type != 4) continue;
    auto vals = read_values(type, count, e + 8);
    switch (tag) {
      case 256: width = vals.at(0); break;
      case 257: height = vals.at(0); break;
      case 258: bits = vals.at(0); break;
      case 259: compression = vals.at(0); break;
      case 273: strip_offsets = vals; break;
      case 277: spp = vals.at(0); break;
      case 278: rows_per_strip = vals.at(0); break;
      case 279: strip_counts = vals; break;
      case 284: planar = vals.at(0); break;
      default: break;
    }
  }

  if (width == 0 || height == 0 || strip_offsets.empty()) {
    throw Error(Errc::unreadable_raster, "incomplete TIFF");
  }
  if (compression != 1) {
    throw Error(Errc::unreadable_raster, "compressed TIFF unsupported");
  }
  if (bits != 8 || planar != 1 || (spp != 1 && spp != 3 && spp != 4)) {
    throw Error(Errc::unreadable_raster, "unsupported TIFF layout");
  }
  if (strip_counts.size() != strip_offsets.size()) {
    throw Error(Errc::unreadable_raster, "TIFF strip tables disagree");
  }

  std::vector<std::uint8_t> pixels;
  pixels.reserve(std::size_t(width) * height * spp);
  for (std::size_t i = 0; i < strip_offsets.size(); ++i) {
    if (std::size_t(strip_offsets[i]) + strip_counts[i] > size) {
      throw Error(Errc::unreadable_raster, "TIFF strip out of range");
    }
    pixels.insert(pixels.end(), data + strip_offsets[i],
                  data + strip_offsets[i] + strip_counts[i]);
  }
  if (pixels.size() < std::size_t(width) * height * spp) {
    throw Error(Errc::unreadable_raster, "TIFF pixel data short");
  }
  (void)rows_per_strip;

  Image out;
  out.width = int(width);
  out.height = int(height);
  out.data.resize(std::size_t(width) * height * 3);
  for (std::size_t p = 0; p < std::size_t(width) * height; ++p) {
    const std::uint8_t* s = pixels.data() + p * spp;
    std::uint8_t* d = out.data.data() + p * 3;
    if (spp == 1) {
      d[0] = d[1] = d[2] = s[0];
    } else {
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return out;
}

Image decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
    return decode_png(bytes.data(), bytes.size());
  }
  if (bytes.size() >= 4 && ((bytes[0] == 'I' && bytes[1] == 'I') ||
                            (bytes[0] == 'M' && bytes[1] == 'M'))) {
    return decode_tiff(bytes.data(), bytes.size());
  }
  throw Error(Errc::unreadable_raster, "unrecognized raster format");
}

Image load_image(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_binary_file(path);
  } catch (const Error& e) {
    throw Error(Errc::unreadable_raster, e.what());
  }
  return decode_image(bytes);
}

void save_png(const Image& image, const std::filesystem::path& path) {
  auto bytes = encode_png(image);
  write_binary_file(path, bytes.data(), bytes.size());
}

void save_tiff(const Image& image, const std::filesystem::path& path) {
  auto bytes = encode_tiff(image);
  write_binary_file(path, bytes.data(), bytes.size());
}

}  // namespace pathnav
