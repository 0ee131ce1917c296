#include "blindinv/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace blindinv {

namespace {

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u16(std::ostream& os, uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); }

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint16_t read_u16(std::istream& is) {
  uint16_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 2);
  return v;
}

}  // namespace

Signal read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("read_wav: cannot open " + path);
  char tag[5] = {0};
  is.read(tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0) throw Error("read_wav: not a RIFF file: " + path);
  read_u32(is);
  is.read(tag, 4);
  if (std::strncmp(tag, "WAVE", 4) != 0) throw Error("read_wav: not a WAVE file: " + path);

  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<int16_t> pcm;
  bool have_fmt = false, have_data = false;
  while (is.read(tag, 4)) {
    uint32_t len = read_u32(is);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      uint16_t fmt = read_u16(is);
      channels = read_u16(is);
      rate = read_u32(is);
      read_u32(is);
      read_u16(is);
      bits = read_u16(is);
      if (len > 16) is.seekg(len - 16, std::ios::cur);
      if (fmt != 1) throw Error("read_wav: only PCM supported");
      have_fmt = true;
    } else if (std::strncmp(tag, "data", 4) == 0) {
      pcm.resize(len / 2);
      is.read(reinterpret_cast<char*>(pcm.data()), len);
      have_data = true;
    } else {
      is.seekg(len + (len & 1), std::ios::cur);
    }
  }
  if (!have_fmt || !have_data) throw Error("read_wav: missing fmt or data chunk in " + path);
  if (channels != 1) throw Error("read_wav: only mono supported");
  if (bits != 16) throw Error("read_wav: only 16-bit PCM supported");

  Signal out;
  out.sample_rate = int(rate);
  out.samples.resize(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) out.samples[i] = pcm[i] / 32768.0;
  return out;
}

void write_wav(const std::string& path, const Signal& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_wav: cannot open " + path);
  uint32_t data_len = uint32_t(x.samples.size() * 2);
  os.write("RIFF", 4);
  write_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32(os, 16);
  write_u16(os, 1);
  write_u16(os, 1);
  write_u32(os, uint32_t(x.sample_rate));
  write_u32(os, uint32_t(x.sample_rate) * 2);
  write_u16(os, 2);
  write_u16(os, 16);
  os.write("data", 4);
  write_u32(os, data_len);
  for (double v : x.samples) {
    double q = std::clamp(v, -1.0, 32767.0 / 32768.0);
    int16_t s = int16_t(std::lrint(q * 32768.0));
    os.write(reinterpret_cast<const char*>(&s), 2);
  }
}

void write_csv(const std::string& path, const Signal& x) {
  std::ofstream os(path);
  if (!os) throw Error("write_csv: cannot open " + path);
  os << "amplitude\n";
  os.precision(17);
  for (double v : x.samples) os << v << "\n";
}

Signal read_csv(const std::string& path, int sample_rate) {
  std::ifstream is(path);
  if (!is) throw Error("read_csv: cannot open " + path);
  std::string line;
  std::getline(is, line);  // header
  Signal out;
  out.sample_rate = sample_rate;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.samples.push_back(std::stod(line));
  }
  return out;
}

}  // namespace blindinv
