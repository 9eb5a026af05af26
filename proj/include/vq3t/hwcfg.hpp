#pragma once
// Hardware description for the cycle and energy model. The default values
// describe one accelerator instance: a 64x16 grid of bf16 functional units
// whose integer lanes regroup into a 64x64 8-bit MAC array or a 128x128
// 4-bit MAC array, double-buffered weight and input SRAMs, a single output
// tile buffer, a quantization unit on the array's output path, and one DRAM
// channel shared by weight streaming and writeback.
//
// Configurations load from plain-text `key = value` files. Keys match the
// field names below; unknown keys are errors so typos cannot silently fall
// back to defaults.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vq3t {

struct HardwareConfig {
  // PE grids. Each BFU contributes four 8-bit integer lanes, so the 8-bit
  // array repacks the same silicon: bfu_rows*bfu_cols*4 == int8_rows*
  // int8_cols. Each 8-bit lane splits into four 4-bit MACs, quadrupling the
  // PE count again for the 4-bit array.
  int bfu_rows = 64;
  int bfu_cols = 16;
  int int8_rows = 64;
  int int8_cols = 64;
  int int4_rows = 128;
  int int4_cols = 128;

  // On-chip SRAM in bytes. Weight and input buffers are ping-pong pairs and
  // the capacity below is the total across both halves; a stream chunk must
  // fit in one half. The output buffer holds one result tile (or one score
  // tile during attention).
  std::int64_t weight_buffer_bytes = 2 * 131072;
  std::int64_t input_buffer_bytes = 2 * 131072;
  std::int64_t output_buffer_bytes = 32768;

  // Clock and the single off-array bandwidth knob, shared by DRAM weight
  // streaming and result writeback.
  double clock_hz = 1.0e9;
  double dram_bytes_per_cycle = 102.4;
  double dram_pj_per_bit = 5.0;

  // Component power in watts, charged only over each component's active
  // cycles (idle components are clock gated).
  double power_bfu_array = 1.79;
  double power_qu = 0.12;
  double power_weight_buf = 0.13;
  double power_input_buf = 0.12;
  double power_output_buf = 0.02;

  // Small-unit throughput: quantize/dequantize conversions per cycle, and
  // the BFU op count charged per exponential evaluation.
  int qu_values_per_cycle = 64;
  int exp_bfu_ops = 8;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0))
        throw std::invalid_argument(std::string("HardwareConfig: ") + name +
                                    " must be positive");
    };
    positive(bfu_rows, "bfu_rows");
    positive(bfu_cols, "bfu_cols");
    positive(int8_rows, "int8_rows");
    positive(int8_cols, "int8_cols");
    positive(int4_rows, "int4_rows");
    positive(int4_cols, "int4_cols");
    positive(double(weight_buffer_bytes), "weight_buffer_bytes");
    positive(double(input_buffer_bytes), "input_buffer_bytes");
    positive(double(output_buffer_bytes), "output_buffer_bytes");
    positive(clock_hz, "clock_hz");
    positive(dram_bytes_per_cycle, "dram_bytes_per_cycle");
    positive(dram_pj_per_bit, "dram_pj_per_bit");
    positive(power_bfu_array, "power_bfu_array");
    positive(power_qu, "power_qu");
    positive(power_weight_buf, "power_weight_buf");
    positive(power_input_buf, "power_input_buf");
    positive(power_output_buf, "power_output_buf");
    positive(qu_values_per_cycle, "qu_values_per_cycle");
    positive(exp_bfu_ops, "exp_bfu_ops");
    const std::int64_t int8_pes = std::int64_t(int8_rows) * int8_cols;
    const std::int64_t int4_pes = std::int64_t(int4_rows) * int4_cols;
    const std::int64_t bfu_lanes = std::int64_t(bfu_rows) * bfu_cols * 4;
    if (bfu_lanes != int8_pes)
      throw std::invalid_argument(
          "HardwareConfig: bfu_rows*bfu_cols*4 must equal int8_rows*int8_cols");
    if (int4_pes != 4 * int8_pes)
      throw std::invalid_argument(
          "HardwareConfig: int4 array must hold 4x the int8 PEs");
  }
};

namespace hwdetail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace hwdetail

// Parse a `key = value` hardware description. Lines may carry '#' comments;
// blank lines are skipped. Every key must name a HardwareConfig field. The
// parsed config is validated before it is returned.
inline HardwareConfig parse_hardware_config(std::istream& in) {
  HardwareConfig hw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = hwdetail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("hardware config line " +
                                  std::to_string(lineno) + ": expected key = value");
    const std::string key = hwdetail::trim(line.substr(0, eq));
    const std::string value = hwdetail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("hardware config line " +
                                  std::to_string(lineno) + ": expected key = value");

    auto as_int = [&] {
      std::size_t pos = 0;
      long long v = std::stoll(value, &pos);
      if (pos != value.size())
        throw std::invalid_argument("hardware config: bad integer for " + key);
      return v;
    };
    auto as_double = [&] {
      std::size_t pos = 0;
      double v = std::stod(value, &pos);
      if (pos != value.size())
        throw std::invalid_argument("hardware config: bad number for " + key);
      return v;
    };

    if (key == "bfu_rows") hw.bfu_rows = int(as_int());
    else if (key == "bfu_cols") hw.bfu_cols = int(as_int());
    else if (key == "int8_rows") hw.int8_rows = int(as_int());
    else if (key == "int8_cols") hw.int8_cols = int(as_int());
    else if (key == "int4_rows") hw.int4_rows = int(as_int());
    else if (key == "int4_cols") hw.int4_cols = int(as_int());
    else if (key == "weight_buffer_bytes") hw.weight_buffer_bytes = as_int();
    else if (key == "input_buffer_bytes") hw.input_buffer_bytes = as_int();
    else if (key == "output_buffer_bytes") hw.output_buffer_bytes = as_int();
    else if (key == "clock_hz") hw.clock_hz = as_double();
    else if (key == "dram_bytes_per_cycle") hw.dram_bytes_per_cycle = as_double();
    else if (key == "dram_pj_per_bit") hw.dram_pj_per_bit = as_double();
    else if (key == "power_bfu_array") hw.power_bfu_array = as_double();
    else if (key == "power_qu") hw.power_qu = as_double();
    else if (key == "power_weight_buf") hw.power_weight_buf = as_double();
    else if (key == "power_input_buf") hw.power_input_buf = as_double();
    else if (key == "power_output_buf") hw.power_output_buf = as_double();
    else if (key == "qu_values_per_cycle") hw.qu_values_per_cycle = int(as_int());
    else if (key == "exp_bfu_ops") hw.exp_bfu_ops = int(as_int());
    else
      throw std::invalid_argument("hardware config: unknown key '" + key + "'");
  }
  hw.validate();
  return hw;
}

inline HardwareConfig parse_hardware_config(const std::string& text) {
  std::istringstream in(text);
  return parse_hardware_config(in);
}

inline HardwareConfig load_hardware_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hardware config: " + path);
  return parse_hardware_config(in);
}

}  // namespace vq3t
