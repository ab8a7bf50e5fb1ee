// Copyright (C) 2026 The vcmoral Authors
// SPDX-License-Identifier: Apache-2.0

#include "png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace vcm {
namespace {

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t read_u32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const std::vector<uint8_t>& payload) {
  put_u32(out, static_cast<uint32_t>(payload.size()));
  const size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uint32_t crc = static_cast<uint32_t>(
      ::crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
  put_u32(out, crc);
}

std::vector<uint8_t> deflate_buffer(const std::vector<uint8_t>& raw) {
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  if (::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) !=
      Z_OK) {
    throw IoError("png: zlib compression failed");
  }
  compressed.resize(bound);
  return compressed;
}

std::vector<uint8_t> encode_scanlines(const std::vector<uint8_t>& pixels, int height, int width,
                                      int channels) {
  // Filter type 0 (None) on every scanline.
  const size_t stride = static_cast<size_t>(width) * channels;
  std::vector<uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + y * stride, pixels.begin() + (y + 1) * stride);
  }
  return raw;
}

std::vector<uint8_t> encode_png(const std::vector<uint8_t>& pixels, int height, int width,
                                int channels) {
  std::vector<uint8_t> out(kSignature, kSignature + 8);
  std::vector<uint8_t> ihdr;
  put_u32(ihdr, static_cast<uint32_t>(width));
  put_u32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);                                // bit depth
  ihdr.push_back(channels == 3 ? 2 : 0);            // color type
  ihdr.push_back(0);                                // compression
  ihdr.push_back(0);                                // filter method
  ihdr.push_back(0);                                // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", deflate_buffer(encode_scanlines(pixels, height, width, channels)));
  append_chunk(out, "IEND", {});
  return out;
}

uint8_t paeth_predictor(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
  if (pb <= pc) return static_cast<uint8_t>(b);
  return static_cast<uint8_t>(c);
}

void unfilter_scanlines(std::vector<uint8_t>& raw, std::vector<uint8_t>& pixels, int height,
                        int width, int channels) {
  const size_t stride = static_cast<size_t>(width) * channels;
  pixels.resize(stride * height);
  for (int y = 0; y < height; ++y) {
    const uint8_t filter = raw[y * (stride + 1)];
    const uint8_t* in = raw.data() + y * (stride + 1) + 1;
    uint8_t* cur = pixels.data() + y * stride;
    const uint8_t* prev = y > 0 ? pixels.data() + (y - 1) * stride : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      const int left = i >= static_cast<size_t>(channels) ? cur[i - channels] : 0;
      const int up = prev ? prev[i] : 0;
      const int up_left = (prev && i >= static_cast<size_t>(channels)) ? prev[i - channels] : 0;
      int value = in[i];
      switch (filter) {
        case 0: break;
        case 1: value += left; break;
        case 2: value += up; break;
        case 3: value += (left + up) / 2; break;
        case 4: value += paeth_predictor(left, up, up_left); break;
        default: throw IoError("png: unknown scanline filter " + std::to_string(filter));
      }
      cur[i] = static_cast<uint8_t>(value & 0xFF);
    }
  }
}

struct DecodedPng {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;
};

DecodedPng decode_png(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
    throw IoError("png: bad signature");
  }
  DecodedPng decoded;
  std::vector<uint8_t> idat;
  bool saw_ihdr = false;
  bool saw_iend = false;
  size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const uint32_t length = read_u32(bytes.data() + pos);
    if (pos + 12 + static_cast<size_t>(length) > bytes.size()) {
      throw IoError("png: truncated chunk");
    }
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const uint8_t* payload = bytes.data() + pos + 8;
    const uint32_t stored_crc = read_u32(payload + length);
    const uint32_t actual_crc = static_cast<uint32_t>(
        ::crc32(0, bytes.data() + pos + 4, static_cast<uInt>(length + 4)));
    if (stored_crc != actual_crc) throw IoError("png: chunk crc mismatch");
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (length != 13) throw IoError("png: bad IHDR length");
      decoded.width = static_cast<int>(read_u32(payload));
      decoded.height = static_cast<int>(read_u32(payload + 4));
      const int bit_depth = payload[8];
      const int color_type = payload[9];
      const int interlace = payload[12];
      if (decoded.width < 1 || decoded.height < 1) throw IoError("png: bad dimensions");
      if (bit_depth != 8) throw IoError("png: only bit depth 8 is supported");
      if (color_type == 2) {
        decoded.channels = 3;
      } else if (color_type == 0) {
        decoded.channels = 1;
      } else {
        throw IoError("png: unsupported color type " + std::to_string(color_type));
      }
      if (interlace != 0) throw IoError("png: interlaced images are not supported");
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + length);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
      break;
    }
    pos += 12 + length;
  }
  if (!saw_ihdr || !saw_iend) throw IoError("png: missing IHDR or IEND");

  const size_t stride = static_cast<size_t>(decoded.width) * decoded.channels;
  uLongf raw_size = static_cast<uLongf>((stride + 1) * decoded.height);
  std::vector<uint8_t> raw(raw_size);
  if (::uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != (stride + 1) * static_cast<size_t>(decoded.height)) {
    throw IoError("png: corrupt image data");
  }
  unfilter_scanlines(raw, decoded.pixels, decoded.height, decoded.width, decoded.channels);
  return decoded;
}

uint8_t to_byte(double v) { return static_cast<uint8_t>(std::lround(255.0 * v)); }

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed to write '" + path + "'");
}

}  // namespace

std::vector<uint8_t> encode_image_png(const ImageTensor& img) {
  validate_image(img);
  std::vector<uint8_t> pixels(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i) pixels[i] = to_byte(img.data[i]);
  return encode_png(pixels, img.height, img.width, 3);
}

ImageTensor decode_image_png(const std::vector<uint8_t>& bytes) {
  const DecodedPng decoded = decode_png(bytes);
  ImageTensor img;
  img.height = decoded.height;
  img.width = decoded.width;
  img.data.resize(static_cast<size_t>(decoded.height) * decoded.width * 3);
  if (decoded.channels == 3) {
    for (size_t i = 0; i < img.data.size(); ++i) {
      img.data[i] = static_cast<float>(decoded.pixels[i]) / 255.0f;
    }
  } else {
    for (size_t p = 0; p < img.pixel_count(); ++p) {
      const float v = static_cast<float>(decoded.pixels[p]) / 255.0f;
      img.data[p * 3 + 0] = v;
      img.data[p * 3 + 1] = v;
      img.data[p * 3 + 2] = v;
    }
  }
  return img;
}

void write_image_png(const ImageTensor& img, const std::string& path) {
  write_file(path, encode_image_png(img));
}

ImageTensor read_image_png(const std::string& path) {
  try {
    return decode_image_png(read_file(path));
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " (file '" + path + "')");
  }
}

std::vector<uint8_t> encode_grayscale_png(const std::vector<double>& values, int height,
                                          int width) {
  if (height < 1 || width < 1 ||
      values.size() != static_cast<size_t>(height) * width) {
    throw ContractViolation("grayscale export: values size does not match dimensions");
  }
  std::vector<uint8_t> pixels(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw ContractViolation("grayscale export expects values in [0,1]");
    }
    pixels[i] = to_byte(values[i]);
  }
  return encode_png(pixels, height, width, 1);
}

void write_grayscale_png(const std::vector<double>& values, int height, int width,
                         const std::string& path) {
  write_file(path, encode_grayscale_png(values, height, width));
}

void write_mask_png(const ImageMask& mask, const std::string& path) {
  std::vector<double> values(mask.values.begin(), mask.values.end());
  write_grayscale_png(values, mask.height, mask.width, path);
}

}  // namespace vcm
