#include "swann/rl/replay.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace swann::rl {

void ReplayBuffer::push(std::span<const double> s, std::span<const double> a,
                        double r, std::span<const double> s2, bool done,
                        uint16_t policy_version) {
  if (static_cast<int>(s.size()) != obs_dim_ ||
      static_cast<int>(s2.size()) != obs_dim_ ||
      static_cast<int>(a.size()) != act_dim_)
    throw std::invalid_argument("replay push: dimension mismatch");
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("replay push: reward outside [0,1]");

  const size_t slot = count_ % capacity_;
  const size_t need = slot + 1;
  if (s_.size() < need * obs_dim_) {
    s_.resize(need * obs_dim_);
    s2_.resize(need * obs_dim_);
    a_.resize(need * act_dim_);
    r_.resize(need);
    done_.resize(need);
    version_.resize(need);
  }
  for (int i = 0; i < obs_dim_; ++i) {
    s_[slot * obs_dim_ + i] = static_cast<float>(s[i]);
    s2_[slot * obs_dim_ + i] = static_cast<float>(s2[i]);
  }
  for (int i = 0; i < act_dim_; ++i)
    a_[slot * act_dim_ + i] = static_cast<float>(a[i]);
  r_[slot] = static_cast<float>(r);
  done_[slot] = done ? 1 : 0;
  version_[slot] = policy_version;
  count_ += 1;
}

void ReplayBuffer::sample(Rng& rng, int n, double reward_scale,
                          Batch& out) const {
  const size_t len = size();
  if (len < static_cast<size_t>(n))
    throw std::runtime_error("replay sample: fewer transitions than batch");
  out.role = role_;
  out.size = n;
  out.obs_dim = obs_dim_;
  out.act_dim = act_dim_;
  out.s.resize(static_cast<size_t>(n) * obs_dim_);
  out.s2.resize(static_cast<size_t>(n) * obs_dim_);
  out.a.resize(static_cast<size_t>(n) * act_dim_);
  out.r.resize(n);
  out.done.resize(n);
  for (int e = 0; e < n; ++e) {
    const size_t k = rng.index(len);
    for (int i = 0; i < obs_dim_; ++i) {
      out.s[static_cast<size_t>(e) * obs_dim_ + i] = s_[k * obs_dim_ + i];
      out.s2[static_cast<size_t>(e) * obs_dim_ + i] = s2_[k * obs_dim_ + i];
    }
    for (int i = 0; i < act_dim_; ++i)
      out.a[static_cast<size_t>(e) * act_dim_ + i] = a_[k * act_dim_ + i];
    out.r[e] = reward_scale * static_cast<double>(r_[k]);
    out.done[e] = done_[k];
  }
}

namespace {
struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <class T>
void write_raw(std::FILE* f, const T& v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1)
    throw std::runtime_error("replay save: write failed");
}

template <class T>
T read_raw(std::FILE* f) {
  T v;
  if (std::fread(&v, sizeof(T), 1, f) != 1)
    throw std::runtime_error("replay load: truncated file");
  return v;
}
}  // namespace

// Length-prefixed binary records: "SWRB" | version u8 | role u8 |
// obs_dim u16 | act_dim u16 | capacity u64 | count u32 | then per record
// u32 byte length followed by s, a, r (f32), s2, done u8, version u16.
void ReplayBuffer::save(const std::string& path) const {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("replay save: cannot open " + path);
  std::fwrite("SWRB", 1, 4, f.get());
  write_raw<uint8_t>(f.get(), 1);
  write_raw<uint8_t>(f.get(), static_cast<uint8_t>(role_));
  write_raw<uint16_t>(f.get(), static_cast<uint16_t>(obs_dim_));
  write_raw<uint16_t>(f.get(), static_cast<uint16_t>(act_dim_));
  write_raw<uint64_t>(f.get(), capacity_);
  const uint32_t n = static_cast<uint32_t>(size());
  write_raw<uint32_t>(f.get(), n);
  const uint32_t rec_len = static_cast<uint32_t>(
      4 * (2 * obs_dim_ + act_dim_ + 1) + 1 + 2);
  for (uint32_t k = 0; k < n; ++k) {
    write_raw<uint32_t>(f.get(), rec_len);
    std::fwrite(&s_[k * obs_dim_], 4, obs_dim_, f.get());
    std::fwrite(&a_[k * act_dim_], 4, act_dim_, f.get());
    write_raw<float>(f.get(), r_[k]);
    std::fwrite(&s2_[k * obs_dim_], 4, obs_dim_, f.get());
    write_raw<uint8_t>(f.get(), done_[k]);
    write_raw<uint16_t>(f.get(), version_[k]);
  }
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("replay load: cannot open " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "SWRB", 4))
    throw std::runtime_error("replay load: bad magic");
  if (read_raw<uint8_t>(f.get()) != 1)
    throw std::runtime_error("replay load: unknown version");
  const auto role = static_cast<BufferRole>(read_raw<uint8_t>(f.get()));
  const int obs_dim = read_raw<uint16_t>(f.get());
  const int act_dim = read_raw<uint16_t>(f.get());
  const auto capacity = read_raw<uint64_t>(f.get());
  const auto n = read_raw<uint32_t>(f.get());
  ReplayBuffer buf(role, capacity, obs_dim, act_dim);
  std::vector<double> s(obs_dim), a(act_dim), s2(obs_dim);
  std::vector<float> sf(obs_dim), af(act_dim), s2f(obs_dim);
  for (uint32_t k = 0; k < n; ++k) {
    const auto rec_len = read_raw<uint32_t>(f.get());
    const uint32_t want =
        static_cast<uint32_t>(4 * (2 * obs_dim + act_dim + 1) + 1 + 2);
    if (rec_len != want)
      throw std::runtime_error("replay load: bad record length");
    if (std::fread(sf.data(), 4, obs_dim, f.get()) != (size_t)obs_dim ||
        std::fread(af.data(), 4, act_dim, f.get()) != (size_t)act_dim)
      throw std::runtime_error("replay load: truncated record");
    const float r = read_raw<float>(f.get());
    if (std::fread(s2f.data(), 4, obs_dim, f.get()) != (size_t)obs_dim)
      throw std::runtime_error("replay load: truncated record");
    const uint8_t done = read_raw<uint8_t>(f.get());
    const uint16_t ver = read_raw<uint16_t>(f.get());
    for (int i = 0; i < obs_dim; ++i) {
      s[i] = sf[i];
      s2[i] = s2f[i];
    }
    for (int i = 0; i < act_dim; ++i) a[i] = af[i];
    buf.push(s, a, r, s2, done != 0, ver);
  }
  return buf;
}

}  // namespace swann::rl
