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

// Reliable byte-stream transport with vectored writes. TCP is the only
// implementation; Stream is the seam for other transports.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "tfgb/wire.hpp"

namespace tfgb {

inline constexpr std::uint16_t kDefaultPort = 50001;

struct Endpoint {
  std::string host = "localhost";
  std::uint16_t port = kDefaultPort;

  std::string to_string() const;
  // "host:port"; throws ConfigError.
  static Endpoint parse(std::string_view text);

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// Bytes moved through the streams that share this object. Written by the
// owning I/O thread, readable from any thread (the resource monitor).
struct ByteCounters {
  std::atomic<std::uint64_t> tx{0};
  std::atomic<std::uint64_t> rx{0};
};

class Stream : public ByteSource {
 public:
  // Writes every byte of every segment, in order.
  virtual void write_segments(std::span<const BufferView> segments) = 0;
  // Unblocks pending reads/writes on this stream from another thread.
  virtual void shutdown() = 0;
  virtual std::string peer() const = 0;
};

class TcpStream final : public Stream {
 public:
  // Nagle is disabled on every stream. Throws ConnectError naming the endpoint.
  static std::unique_ptr<TcpStream> connect(const Endpoint& ep, ByteCounters* counters = nullptr);

  TcpStream(int fd, std::string peer, ByteCounters* counters);
  ~TcpStream() override;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  // EndOfStream if the peer closed before the first byte, TransportError
  // if it closed mid-read.
  void read_exact(std::span<std::uint8_t> out) override;
  void write_segments(std::span<const BufferView> segments) override;
  void shutdown() override;
  std::string peer() const override { return peer_; }

  // Raw write without framing, for tests that inject garbage.
  void write_raw(std::span<const std::uint8_t> bytes);

 private:
  int fd_;
  std::string peer_;
  ByteCounters* counters_;
};

class TcpListener {
 public:
  // Port 0 binds an ephemeral port. Throws StartupError.
  static TcpListener bind(const Endpoint& ep);

  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  ~TcpListener();

  std::uint16_t port() const { return port_; }
  int fd() const { return fd_; }
  std::unique_ptr<TcpStream> accept(ByteCounters* counters);

 private:
  TcpListener(int fd, std::uint16_t port) : fd_(fd), port_(port) {}
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace tfgb
