#pragma once

#include <stdexcept>
#include <string>

namespace windfd {

/// Raised when the closed-loop integration produces a non-finite or
/// non-physical state (e.g. rotor speed at or below zero).
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(std::string run_id, double time_s, const std::string& what)
      : std::runtime_error("simulation diverged in run '" + run_id + "' at t=" +
                           std::to_string(time_s) + " s: " + what),
        run_id_(std::move(run_id)),
        time_s_(time_s) {}

  const std::string& run_id() const noexcept { return run_id_; }
  double time() const noexcept { return time_s_; }

 private:
  std::string run_id_;
  double time_s_;
};

/// Integrity failure while decoding a binary artifact.
class ChecksumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, int batch)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

/// Reading or writing an artifact failed; carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& what)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A pipeline stage failed; carries the stage name for the CLI exit path.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace windfd
