#pragma once

// HFV1 frame files.
//
// Little-endian layout:
//   offset  0  char[4] "HOMF"
//   offset  4  u32     version (1)
//   offset  8  u32     frame_count
//   offset 12  u32     samples_per_frame
//   offset 16  f64     sample_period_s
//   offset 24  u32     adc_bits
//   offset 28  u32     signal_pulse_center
//   offset 32  u32     dark_pulse_center
//   offset 36  f64     area_gain
//   offset 44  frame_count records of samples_per_frame samples, one byte per
//              sample when adc_bits <= 8, otherwise u16.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "focktomo/frame_synth.hpp"

namespace focktomo {

inline constexpr char kHfv1Magic[4] = {'H', 'O', 'M', 'F'};
inline constexpr std::uint32_t kHfv1Version = 1;
inline constexpr std::size_t kHfv1HeaderSize = 44;

struct FrameFile {
  /// Header fields are taken from the file; the rest keep their defaults.
  AcquisitionSpec spec;
  std::vector<FrameRecord> frames;
};

std::size_t bytes_per_sample(int adc_bits);

std::vector<std::uint8_t> encode_frames(std::span<const FrameRecord> frames, const AcquisitionSpec& spec);

/// Throws ParseError naming the failing byte offset.
FrameFile decode_frames(std::span<const std::uint8_t> bytes);

/// Throws IoError with the path on failure.
void write_frames(std::span<const FrameRecord> frames, const AcquisitionSpec& spec,
                  const std::filesystem::path& path);

FrameFile read_frames(const std::filesystem::path& path);

/// Header-derived spec merged onto `defaults` (pulse width, powers, noise).
FrameFile read_frames(const std::filesystem::path& path, const AcquisitionSpec& defaults);

}  // namespace focktomo
