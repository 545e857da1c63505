// Copyright 2026 The tfgb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tfgb/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/uio.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <climits>
#include <cstring>
#include <utility>
#include <vector>

#include "tfgb/error.hpp"

namespace tfgb {

namespace {

std::string errno_text(int err) { return std::strerror(err); }

struct AddrInfoDeleter {
  void operator()(addrinfo* ai) const { freeaddrinfo(ai); }
};
using AddrInfoPtr = std::unique_ptr<addrinfo, AddrInfoDeleter>;

AddrInfoPtr resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = passive ? AI_PASSIVE : 0;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  if (int rc = getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    return AddrInfoPtr(nullptr);
  }
  return AddrInfoPtr(res);
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

#ifndef IOV_MAX
constexpr std::size_t kIovMax = 1024;
#else
constexpr std::size_t kIovMax = IOV_MAX;
#endif

}  // namespace

std::string Endpoint::to_string() const {
  if (host.find(':') != std::string::npos) return "[" + host + "]:" + std::to_string(port);
  return host + ":" + std::to_string(port);
}

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("endpoint '" + std::string(text) + "' is not host:port");
  }
  std::string_view host = text.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  const std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 1 || port > 65535) {
    throw ConfigError("endpoint '" + std::string(text) + "' has a port outside [1, 65535]");
  }
  return Endpoint{std::string(host), static_cast<std::uint16_t>(port)};
}

std::unique_ptr<TcpStream> TcpStream::connect(const Endpoint& ep, ByteCounters* counters) {
  auto res = resolve(ep, false);
  if (!res) throw ConnectError("cannot resolve " + ep.to_string());
  int last_err = 0;
  for (addrinfo* ai = res.get(); ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_err = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      set_nodelay(fd);
      return std::make_unique<TcpStream>(fd, ep.to_string(), counters);
    }
    last_err = errno;
    ::close(fd);
  }
  throw ConnectError("cannot connect to " + ep.to_string() + ": " + errno_text(last_err));
}

TcpStream::TcpStream(int fd, std::string peer, ByteCounters* counters)
    : fd_(fd), peer_(std::move(peer)), counters_(counters) {}

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpStream::read_exact(std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n > 0) {
      got += static_cast<std::size_t>(n);
      if (counters_) counters_->rx.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
      continue;
    }
    if (n == 0) {
      if (got == 0) throw EndOfStream("peer " + peer_ + " closed the stream");
      throw TransportError("peer " + peer_ + " closed the stream mid-frame");
    }
    if (errno == EINTR) continue;
    throw TransportError("recv from " + peer_ + " failed: " + errno_text(errno));
  }
}

void TcpStream::write_segments(std::span<const BufferView> segments) {
  std::vector<iovec> iov;
  iov.reserve(segments.size());
  for (const auto& s : segments) {
    if (!s.empty()) iov.push_back({const_cast<std::uint8_t*>(s.data()), s.size()});
  }
  std::size_t first = 0;
  while (first < iov.size()) {
    msghdr msg{};
    msg.msg_iov = iov.data() + first;
    msg.msg_iovlen = std::min(iov.size() - first, kIovMax);
    ssize_t n = ::sendmsg(fd_, &msg, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("sendmsg to " + peer_ + " failed: " + errno_text(errno));
    }
    if (counters_) counters_->tx.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
    // Advance past fully written entries, trim the partial one.
    auto left = static_cast<std::size_t>(n);
    while (first < iov.size() && left >= iov[first].iov_len) {
      left -= iov[first].iov_len;
      ++first;
    }
    if (left > 0) {
      iov[first].iov_base = static_cast<std::uint8_t*>(iov[first].iov_base) + left;
      iov[first].iov_len -= left;
    }
  }
}

void TcpStream::write_raw(std::span<const std::uint8_t> bytes) {
  const BufferView seg[] = {bytes};
  write_segments(seg);
}

void TcpStream::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

TcpListener TcpListener::bind(const Endpoint& ep) {
  auto res = resolve(ep, true);
  if (!res) throw StartupError("cannot resolve listen address " + ep.to_string());
  int last_err = 0;
  for (addrinfo* ai = res.get(); ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_err = errno;
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 128) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof(addr);
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
      std::uint16_t port = 0;
      if (addr.ss_family == AF_INET) port = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      if (addr.ss_family == AF_INET6) port = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
      return TcpListener(fd, port);
    }
    last_err = errno;
    ::close(fd);
  }
  throw StartupError("cannot listen on " + ep.to_string() + ": " + errno_text(last_err));
}

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(other.fd_), port_(other.port_) { other.fd_ = -1; }

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    port_ = other.port_;
  }
  return *this;
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpStream> TcpListener::accept(ByteCounters* counters) {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  for (;;) {
    int fd = ::accept4(fd_, reinterpret_cast<sockaddr*>(&addr), &len, SOCK_CLOEXEC);
    if (fd >= 0) {
      set_nodelay(fd);
      char host[NI_MAXHOST] = "?";
      char serv[NI_MAXSERV] = "?";
      ::getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host, sizeof(host), serv, sizeof(serv),
                    NI_NUMERICHOST | NI_NUMERICSERV);
      return std::make_unique<TcpStream>(fd, std::string(host) + ":" + serv, counters);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

}  // namespace tfgb
