#include "ringtower/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ringtower/data_model.hpp"

namespace ringtower {
namespace {

cv::Mat to_bgr(const RgbImage& image) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb& p = image(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  return bgr;
}

const std::vector<int> kPngParams = {cv::IMWRITE_PNG_COMPRESSION, 1};

}  // namespace

RgbImage read_png(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw InputError("frame", "cannot decode " + path.string());
  RgbImage image(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) image(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
  }
  return image;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  if (!cv::imwrite(path.string(), to_bgr(image), kPngParams))
    throw InputError("frame", "cannot write " + path.string());
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  std::vector<std::uint8_t> buffer;
  cv::imencode(".png", to_bgr(image), buffer, kPngParams);
  return buffer;
}

}  // namespace ringtower
