#pragma once

#include <stdexcept>
#include <string>

namespace fouriermix {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (CIFAR binaries, prediction files, PNGs, model files).
class FormatError : public Error {
public:
  using Error::Error;
};

// Two objects that must agree in shape do not.
class ShapeMismatch : public Error {
public:
  using Error::Error;
};

// A plane wave whose cosine field vanishes everywhere cannot be scaled to a norm.
class DegenerateBasis : public Error {
public:
  using Error::Error;
};

// Invalid configuration or arguments (empty primitive set, bins > n, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Raised by a Predictor; the heatmap sweep rethrows it with the wave vector attached.
class PredictorError : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

} // namespace fouriermix
