#include "focktomo/hfv1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

static_assert(std::endian::native == std::endian::little, "HFV1 I/O assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

FrameFile decode_with_defaults(std::span<const std::uint8_t> bytes, AcquisitionSpec spec) {
  using Kind = ParseError::Kind;
  if (bytes.size() < sizeof(kHfv1Magic) || std::memcmp(bytes.data(), kHfv1Magic, sizeof(kHfv1Magic)) != 0) {
    throw ParseError(Kind::BadMagic, 0, "missing HOMF magic");
  }
  if (bytes.size() < kHfv1HeaderSize) {
    throw ParseError(Kind::Truncated, bytes.size(), "header truncated");
  }
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kHfv1Version) {
    throw ParseError(Kind::BadVersion, 4, "unsupported version " + std::to_string(version));
  }
  const auto frame_count = get<std::uint32_t>(bytes, 8);
  const auto samples_per_frame = get<std::uint32_t>(bytes, 12);
  const auto sample_period = get<double>(bytes, 16);
  const auto adc_bits = get<std::uint32_t>(bytes, 24);
  const auto signal_center = get<std::uint32_t>(bytes, 28);
  const auto dark_center = get<std::uint32_t>(bytes, 32);
  const auto area_gain = get<double>(bytes, 36);

  if (samples_per_frame == 0) throw ParseError(Kind::BadHeader, 12, "samples_per_frame is zero");
  if (!(sample_period > 0.0)) throw ParseError(Kind::BadHeader, 16, "sample_period must be positive");
  if (adc_bits < 1 || adc_bits > 16) throw ParseError(Kind::BadHeader, 24, "adc_bits outside [1, 16]");
  if (signal_center >= samples_per_frame) throw ParseError(Kind::BadHeader, 28, "signal pulse outside frame");
  if (dark_center >= samples_per_frame) throw ParseError(Kind::BadHeader, 32, "dark pulse outside frame");

  spec.samples_per_frame = static_cast<int>(samples_per_frame);
  spec.sample_period = sample_period;
  spec.adc_bits = static_cast<int>(adc_bits);
  spec.signal_pulse_center = static_cast<int>(signal_center);
  spec.dark_pulse_center = static_cast<int>(dark_center);
  spec.area_gain = area_gain;

  const std::size_t width = bytes_per_sample(spec.adc_bits);
  const std::size_t record = width * samples_per_frame;
  const std::size_t expected = kHfv1HeaderSize + record * frame_count;
  if (bytes.size() < expected) {
    const std::size_t complete = (bytes.size() - kHfv1HeaderSize) / record;
    throw ParseError(Kind::Truncated, kHfv1HeaderSize + complete * record,
                     "payload truncated: frame " + std::to_string(complete) + " of " + std::to_string(frame_count) +
                         " incomplete");
  }
  if (bytes.size() > expected) {
    throw ParseError(Kind::TrailingData, expected, "unexpected bytes after last frame");
  }

  const std::uint32_t top = (1u << adc_bits) - 1;
  FrameFile file{spec, {}};
  file.frames.resize(frame_count);
  std::size_t offset = kHfv1HeaderSize;
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    auto& frame = file.frames[f];
    frame.index = f;
    frame.samples.resize(samples_per_frame);
    for (std::uint32_t k = 0; k < samples_per_frame; ++k, offset += width) {
      const std::uint16_t v = width == 1 ? bytes[offset] : get<std::uint16_t>(bytes, offset);
      if (v > top) throw ParseError(Kind::BadHeader, offset, "sample exceeds adc_bits range");
      frame.samples[k] = v;
    }
  }
  return file;
}

}  // namespace

std::size_t bytes_per_sample(int adc_bits) { return adc_bits <= 8 ? 1 : 2; }

std::vector<std::uint8_t> encode_frames(std::span<const FrameRecord> frames, const AcquisitionSpec& spec) {
  if (spec.adc_bits < 1 || spec.adc_bits > 16) throw SpecError("adc_bits must be in [1, 16]");
  const std::size_t width = bytes_per_sample(spec.adc_bits);
  std::vector<std::uint8_t> out;
  out.reserve(kHfv1HeaderSize + frames.size() * spec.samples_per_frame * width);
  out.insert(out.end(), std::begin(kHfv1Magic), std::end(kHfv1Magic));
  put<std::uint32_t>(out, kHfv1Version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frames.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.samples_per_frame));
  put<double>(out, spec.sample_period);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.adc_bits));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.signal_pulse_center));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.dark_pulse_center));
  put<double>(out, spec.area_gain);

  const auto top = static_cast<std::uint16_t>(spec.max_code());
  for (const auto& frame : frames) {
    if (frame.samples.size() != static_cast<std::size_t>(spec.samples_per_frame)) {
      throw SpecError("frame " + std::to_string(frame.index) + " has " + std::to_string(frame.samples.size()) +
                      " samples, expected " + std::to_string(spec.samples_per_frame));
    }
    for (auto v : frame.samples) {
      if (v > top) throw SpecError("frame " + std::to_string(frame.index) + " sample exceeds adc range");
      if (width == 1) {
        out.push_back(static_cast<std::uint8_t>(v));
      } else {
        put<std::uint16_t>(out, v);
      }
    }
  }
  return out;
}

FrameFile decode_frames(std::span<const std::uint8_t> bytes) { return decode_with_defaults(bytes, {}); }

void write_frames(std::span<const FrameRecord> frames, const AcquisitionSpec& spec,
                  const std::filesystem::path& path) {
  const auto bytes = encode_frames(frames, spec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

FrameFile read_frames(const std::filesystem::path& path, const AcquisitionSpec& defaults) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) throw IoError("read failed for " + path.string());
  return decode_with_defaults(bytes, defaults);
}

FrameFile read_frames(const std::filesystem::path& path) { return read_frames(path, AcquisitionSpec{}); }

}  // namespace focktomo
