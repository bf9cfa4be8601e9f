#include "ddib/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ddib/error.hpp"

namespace ddib {

RgbImage::RgbImage(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw ShapeError("image dimensions must be positive");
  }
  data.assign(static_cast<std::size_t>(w) * h * 3, 0);
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int(const char* what) {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw FormatError(std::string("PPM ") + what + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw FormatError(std::string("PPM header: missing ") + what);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RgbImage parse_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw FormatError("not a PPM file");
  }
  if (bytes[1] != '6') {
    throw FormatError(std::string("unsupported PNM variant P") + bytes[1] +
                      " (only binary RGB P6 is accepted)");
  }
  HeaderReader reader(bytes);
  reader.advance();
  reader.advance();
  const long w = reader.read_int("width");
  const long h = reader.read_int("height");
  const long maxval = reader.read_int("maxval");
  if (maxval != 255) {
    throw FormatError("unsupported PPM maxval " + std::to_string(maxval) +
                      " (expected 255)");
  }
  if (w <= 0 || h <= 0) throw FormatError("PPM has an empty raster");
  // Exactly one whitespace byte separates the header from the raster.
  if (reader.pos() >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
    throw FormatError("PPM header not terminated by whitespace");
  }
  const std::size_t start = reader.pos() + 1;
  RgbImage image(static_cast<int>(w), static_cast<int>(h));
  if (bytes.size() - start < image.data.size()) {
    throw FormatError("PPM raster truncated");
  }
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(start),
            bytes.begin() + static_cast<std::ptrdiff_t>(start + image.data.size()),
            image.data.begin());
  return image;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return parse_ppm(bytes);
}

std::string encode_ppm(const RgbImage& image) {
  if (image.data.size() != image.pixel_count() * 3 || image.width <= 0) {
    throw ShapeError("image buffer does not match its dimensions");
  }
  std::string out = "P6\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data.data()),
             image.data.size());
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  const std::string bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write image " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace ddib
