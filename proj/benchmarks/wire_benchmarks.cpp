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


#include <benchmark/benchmark.h>

#include "tfgb/rpc.hpp"
#include "tfgb/wire.hpp"
#include "tfgb/workload.hpp"

namespace {

using namespace tfgb;

// Arg: number of Large buffers in the payload.
Payload large_payload(std::int64_t n) {
  return materialize(generate_uniform({BufferCategory::Large}, static_cast<std::size_t>(n), BufferSizeConfig{}, 1));
}

void BM_EncodeNonSerialized(benchmark::State& state) {
  const Payload p = large_payload(state.range(0));
  for (auto _ : state) {
    SegmentList s = encode_nonserialized(p.views(), MsgType::EchoReq, 1);
    benchmark::DoNotOptimize(s.segments().data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * p.total_bytes()));
}
BENCHMARK(BM_EncodeNonSerialized)->Arg(2)->Arg(10);

void BM_EncodeSerialized(benchmark::State& state) {
  const Payload p = large_payload(state.range(0));
  for (auto _ : state) {
    Buffer b = encode_serialized(p.views(), MsgType::EchoReq, 1);
    benchmark::DoNotOptimize(b.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * p.total_bytes()));
}
BENCHMARK(BM_EncodeSerialized)->Arg(2)->Arg(10);

void BM_Decode(benchmark::State& state) {
  const Payload p = large_payload(2);
  const auto mode = static_cast<WireMode>(state.range(0));
  const Buffer frame = encode_frame(mode, p.views(), MsgType::EchoReq, 1).flatten();
  for (auto _ : state) {
    Message m = decode(frame);
    benchmark::DoNotOptimize(m.buffers.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * p.total_bytes()));
}
BENCHMARK(BM_Decode)->Arg(0)->Arg(1);

void BM_Materialize(benchmark::State& state) {
  const auto spec = generate_skew(CategorySet::all(), 10, BufferSizeConfig{}, BufferCategory::Large, 1);
  for (auto _ : state) {
    Payload p = materialize(spec);
    benchmark::DoNotOptimize(p.views().data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * spec.total_bytes()));
}
BENCHMARK(BM_Materialize);

void BM_LoopbackEcho(benchmark::State& state) {
  const auto mode = static_cast<WireMode>(state.range(0));
  ServerConfig cfg;
  cfg.endpoint = {"127.0.0.1", 0};
  cfg.response_spec = generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1);
  ParameterServer server(cfg);
  server.start();
  auto conn = Connection::open(server.bound_endpoint());
  const Payload p = materialize(generate_uniform(CategorySet::all(), 10, BufferSizeConfig{}, 1));
  for (auto _ : state) {
    CallResult r = conn.call(MsgType::EchoReq, p.views(), mode);
    benchmark::DoNotOptimize(r.buffers.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * p.total_bytes()));
}
BENCHMARK(BM_LoopbackEcho)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
