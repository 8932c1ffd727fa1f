// Copyright 2026 The ddrestore Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddr/jpeg_reader.h"

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "ddr/error.h"

namespace ddr {

namespace {

struct ErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void OnError(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void OnMessage(j_common_ptr /*cinfo*/, int /*level*/) {}

struct FileCloser {
  void operator()(FILE* f) const { std::fclose(f); }
};

// No objects with destructors may live in this frame: longjmp skips them.
bool Decode(FILE* f, ErrorManager* err, std::vector<unsigned char>* pixels,
            size_t* height, size_t* width) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->pub);
  err->pub.error_exit = OnError;
  err->pub.emit_message = OnMessage;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  *height = cinfo.output_height;
  *width = cinfo.output_width;
  pixels->resize(size_t{cinfo.output_height} * cinfo.output_width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels->data() + size_t{cinfo.output_scanline} *
                                        cinfo.output_width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

ImageTensor ReadJpegPixels(const std::string& path) {
  std::unique_ptr<FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 0xFF ||
      magic[1] != 0xD8) {
    throw Error(ErrorCode::kNotAJpeg, path + " does not start with SOI");
  }
  std::rewind(f.get());
  ErrorManager err{};
  std::vector<unsigned char> pixels;
  size_t h = 0, w = 0;
  if (!Decode(f.get(), &err, &pixels, &h, &w)) {
    throw Error(ErrorCode::kMalformed, path + ": " + err.message);
  }
  std::vector<double> data(pixels.begin(), pixels.end());
  return ImageTensor(h, w, 3, Domain::kByte255, std::move(data));
}

}  // namespace ddr
