#include "fouriermix/io.hpp"

#include "fouriermix/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace fouriermix {

namespace fs = std::filesystem;

namespace {

constexpr int kCifarSide = 32;
constexpr std::size_t kCifarPlane = kCifarSide * kCifarSide;

double parse_real(const std::string& token, const std::string& where) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw FormatError(where + ": cannot parse '" + token + "' as a number");
  if (!std::isfinite(v))
    throw FormatError(where + ": non-finite value '" + token + "'");
  return v;
}

int parse_int(const std::string& token, const std::string& where) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw FormatError(where + ": cannot parse '" + token + "' as an integer");
  return static_cast<int>(v);
}

} // namespace

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

LabeledDataset parse_cifar_binary(std::span<const std::uint8_t> bytes, CifarVariant variant) {
  const std::size_t record = cifar_record_size(variant);
  if (bytes.empty() || bytes.size() % record != 0) {
    const std::size_t expected = std::max<std::size_t>(1, bytes.size() / record) * record;
    throw FormatError("CIFAR binary is " + std::to_string(bytes.size()) + " bytes; expected " +
                      std::to_string(expected) + " (a multiple of the " + std::to_string(record) +
                      "-byte record)");
  }
  const std::size_t n = bytes.size() / record;
  const std::size_t label_bytes = record - 3 * kCifarPlane;

  LabeledDataset ds;
  ds.num_classes = variant == CifarVariant::Cifar10 ? 10 : 100;
  ds.images.reserve(n);
  ds.labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto rec = bytes.subspan(r * record, record);
    // CIFAR-100: rec[0] is the coarse label (discarded), rec[1] the fine label.
    const int label = rec[label_bytes - 1];
    if (label >= ds.num_classes)
      throw FormatError("record " + std::to_string(r) + " has label " + std::to_string(label));
    const auto pixels = rec.subspan(label_bytes);
    Image img(kCifarSide, kCifarSide, 3);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < kCifarSide; ++y)
        for (int x = 0; x < kCifarSide; ++x)
          img.at(y, x, c) = pixels[c * kCifarPlane + y * kCifarSide + x] / 255.0;
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
  }
  return ds;
}

LabeledDataset load_cifar_binary(const fs::path& path, CifarVariant variant) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_cifar_binary(bytes, variant);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

PredictionSet parse_predictions(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(source + ": empty predictions file");

  bool logits = false;
  int classes = -1;
  {
    if (line.rfind('#', 0) != 0)
      throw FormatError(source + ": missing '#format=... classes=...' header");
    std::istringstream header(line.substr(1));
    std::string field;
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos)
        throw FormatError(source + ": malformed header field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "format") {
        if (value == "logits")
          logits = true;
        else if (value != "probs")
          throw FormatError(source + ": unknown format '" + value + "'");
      } else if (key == "classes") {
        classes = parse_int(value, source + " header");
      }
    }
    if (classes < 1)
      throw FormatError(source + ": header must declare classes=<n> with n >= 1");
  }

  PredictionSet preds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::istringstream row(line);
    std::string token;
    row >> token;
    const int label = parse_int(token, where);
    std::vector<double> values;
    while (row >> token)
      values.push_back(parse_real(token, where));
    if (static_cast<int>(values.size()) != classes)
      throw FormatError(where + ": expected " + std::to_string(classes) + " values, found " +
                        std::to_string(values.size()));
    if (label < 0 || label >= classes)
      throw FormatError(where + ": label " + std::to_string(label) + " outside [0, " +
                        std::to_string(classes) + ")");
    preds.labels.push_back(label);
    preds.probs.push_back(logits ? softmax(values) : std::move(values));
  }
  preds.validate();
  return preds;
}

PredictionSet read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());
  return parse_predictions(in, path.string());
}

void write_predictions(const PredictionSet& preds, const fs::path& path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "#format=probs classes=" << preds.num_classes() << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out << preds.labels[i];
    for (double p : preds.probs[i])
      out << ' ' << p;
    out << '\n';
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png(const Image& img, const fs::path& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ConfigError("PNG output supports 1 or 3 channels, got " + std::to_string(img.channels));
  std::vector<std::uint8_t> bytes(img.data.size());
  std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + png.message);
}

Image read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&png);
    throw FormatError("cannot decode PNG " + path.string() + ": " + png.message);
  }
  Image img(static_cast<int>(png.height), static_cast<int>(png.width), channels);
  std::transform(bytes.begin(), bytes.end(), img.data.begin(), [](std::uint8_t b) { return b / 255.0; });
  return img;
}

LabeledDataset load_png_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw IoError(dir.string() + " is not a directory");
  LabeledDataset ds;
  const fs::path labels_path = dir / "labels.txt";
  if (fs::exists(labels_path)) {
    std::ifstream in(labels_path);
    std::string line;
    int declared = -1;
    int max_label = -1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos)
        continue;
      if (line.rfind("#classes=", 0) == 0) {
        declared = parse_int(line.substr(9), labels_path.string());
        continue;
      }
      std::istringstream row(line);
      std::string file, label;
      if (!(row >> file >> label))
        throw FormatError(labels_path.string() + ":" + std::to_string(line_no) + ": expected '<file> <label>'");
      const int lab = parse_int(label, labels_path.string() + ":" + std::to_string(line_no));
      ds.images.push_back(read_png(dir / file));
      ds.labels.push_back(lab);
      max_label = std::max(max_label, lab);
    }
    ds.num_classes = declared > 0 ? declared : max_label + 1;
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".png")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      ds.images.push_back(read_png(f));
      ds.labels.push_back(0);
    }
    ds.num_classes = 1;
  }
  ds.validate();
  return ds;
}

void save_png_dataset(const LabeledDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream labels(dir / "labels.txt");
  if (!labels)
    throw IoError("cannot write " + (dir / "labels.txt").string());
  labels << "#classes=" << ds.num_classes << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << i << ".png";
    write_png(ds.images[i], dir / name.str());
    labels << name.str() << ' ' << ds.labels[i] << '\n';
  }
}

LabeledDataset load_dataset(const std::string& source, CifarVariant variant) {
  if (fs::is_directory(source))
    return load_png_dataset(source);
  LabeledDataset all;
  std::stringstream list(source);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item.empty())
      continue;
    auto part = load_cifar_binary(item, variant);
    all.num_classes = part.num_classes;
    std::move(part.images.begin(), part.images.end(), std::back_inserter(all.images));
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  if (all.empty())
    throw IoError("no data found at '" + source + "'");
  return all;
}

std::string libpng_version() { return PNG_LIBPNG_VER_STRING; }

} // namespace fouriermix
