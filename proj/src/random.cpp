#include "ssr/random.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace ssr {

std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t stream_id(std::uint64_t group, std::uint64_t member)
{
  // Bases are scattered over 2^64, so base + replication never collides in
  // practice for distinct (group, member).
  return mix64(mix64(group ^ 0x632be59bd9b4e019ull) + member);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t x = mix64(seed) ^ mix64(stream + 0x7f4a7c159e3779b9ull);
  for (auto& word : s_)
  {
    x += 0x9e3779b97f4a7c15ull;
    word = mix64(x);
  }
}

std::uint64_t Rng::uniform_index(std::uint64_t n)
{
  // Lemire: multiply-shift with rejection of the biased low region.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n)
  {
    std::uint64_t const threshold = (0 - n) % n;
    while (low < threshold)
    {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64) + 1;
}

unsigned default_worker_count()
{
  if (char const* env = std::getenv("SSR_WORKERS"))
  {
    try
    {
      int value = std::stoi(env);
      if (value > 0)
        return static_cast<unsigned>(value);
    }
    catch (std::exception const&)
    {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count,
                  std::function<void(std::size_t, std::size_t)> const& body,
                  unsigned workers)
{
  if (workers == 0)
    workers = default_worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1)
  {
    body(0, count);
    return;
  }
  // Small blocks handed out dynamically keep long-tailed run lengths balanced.
  std::size_t const block = std::max<std::size_t>(1, count / (workers * 16));
  std::size_t next = 0;
  std::mutex mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true)
    {
      std::size_t begin;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (next >= count || failure)
          return;
        begin = next;
        next = std::min(count, next + block);
      }
      try
      {
        body(begin, std::min(count, begin + block));
      }
      catch (...)
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure)
          failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    threads.emplace_back(worker);
  for (auto& t : threads)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

}  // namespace ssr
