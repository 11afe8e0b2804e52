/*
 * Copyright 2026 The hjcp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <filesystem>
#include <vector>

#include "hjcp/device.hpp"

using namespace hjcp;

TEST_CASE("transfer time is latency plus size over bandwidth") {
  TransferLink link;
  CHECK(transfer_time(link, 1e6) == 0.0);  // coupled: no link
  link.enabled = true;
  const double want = 0.015e-3 + 4096.0 / (3.0 * 1024 * 1024 * 1024);
  CHECK(transfer_time(link, 4096.0) == want);
}

TEST_CASE("wavefront step time") {
  DeviceProfile d;
  d.worker_count = 8;
  d.wavefront_width = 4;
  const std::vector<double> lanes{1, 2, 3, 4, 5};
  CHECK(simulate_step(d, lanes) == doctest::Approx((4.0 + 5.0) / 2.0));
  d.wavefront_width = 1;
  CHECK(simulate_step(d, lanes) == doctest::Approx(15.0 / 8.0));
}

TEST_CASE("canned profiles are complete for the fine steps") {
  const auto p = canned_profiles();
  for (const DeviceProfile* d : {&p.cpu, &p.gpu}) {
    d->validate();
    for (std::size_t i = 0; i + 1 < kStepCount; ++i) CHECK(d->has(static_cast<StepId>(i)));
    CHECK_FALSE(d->has(StepId::J));
    CHECK_THROWS_AS(d->cost_per_unit(StepId::J), MissingCalibration);
  }
  const DeviceProfile& c = p.cpu;
  CHECK(c.cost_per_unit(StepId::B2) == doctest::Approx(12.0 / (8.0 * 3.0e9) + 28.0e-9));
  CHECK(c.slots() == 4.0);
  CHECK(p.gpu.slots() == doctest::Approx(400.0 / 64.0));
}

TEST_CASE("profile validation") {
  DeviceProfile d = canned_profiles().cpu;
  d.wavefront_width = 0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = canned_profiles().cpu;
  d.mem_cost_per_item[0] = -1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("profile text round trip") {
  ProfileSet set = default_profile_set();
  set.system.contention = 0.125;
  set.system.link.bandwidth = 1e9;
  set.gpu.mem_cost_per_item[index(StepId::J)] = 3.3e-9;
  const ProfileSet back = parse_profiles(format_profiles(set), default_profile_set());
  for (std::size_t i = 0; i < kStepCount; ++i) {
    for (auto [a, b] : {std::pair{&set.cpu, &back.cpu}, std::pair{&set.gpu, &back.gpu}}) {
      CHECK(std::isnan(a->instr_per_item[i]) == std::isnan(b->instr_per_item[i]));
      if (!std::isnan(a->instr_per_item[i])) CHECK(a->instr_per_item[i] == b->instr_per_item[i]);
      if (!std::isnan(a->mem_cost_per_item[i])) CHECK(a->mem_cost_per_item[i] == b->mem_cost_per_item[i]);
    }
  }
  CHECK(back.gpu.mem_cost_per_item[index(StepId::J)] == 3.3e-9);
  CHECK(back.cpu.worker_count == set.cpu.worker_count);
  CHECK(back.gpu.wavefront_width == set.gpu.wavefront_width);
  CHECK(back.system.contention == 0.125);
  CHECK(back.system.link.bandwidth == 1e9);
  CHECK(back.system.copy_bandwidth == set.system.copy_bandwidth);

  const auto path = std::filesystem::temp_directory_path() / "hjcp_profiles_test.txt";
  write_profiles(path, set);
  CHECK(read_profiles(path).gpu.ipc == set.gpu.ipc);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_profiles("cpu.bogus=1\n", default_profile_set()), std::invalid_argument);
  CHECK_THROWS_AS(parse_profiles("contention=abc\n", default_profile_set()), std::invalid_argument);
  CHECK_THROWS_AS(parse_profiles("novalue\n", default_profile_set()), std::invalid_argument);
  CHECK_THROWS_AS(parse_profiles("link.bandwidth=0\n", default_profile_set()), std::invalid_argument);
}

TEST_CASE("logical calibration recovers the memory cost") {
  const auto p = canned_profiles();
  CalibrationOptions opt;
  opt.co_run = false;
  std::vector<std::uint32_t> ones(4096, 1);
  for (const DeviceProfile* d : {&p.cpu, &p.gpu}) {
    DeviceProfile blank = *d;
    blank.mem_cost_per_item[index(StepId::B2)] = d->mem(StepId::B2);
    const DeviceProfile got = calibrate_units(blank, StepId::B2, ones, opt);
    CHECK(got.mem(StepId::B2) == doctest::Approx(d->mem(StepId::B2)).epsilon(1e-9));
    CHECK(got.origin == "calibrated(logical)");
  }
  opt.co_run = true;
  opt.contention = 0.25;
  const DeviceProfile got = calibrate_units(p.cpu, StepId::B2, ones, opt);
  CHECK(got.mem(StepId::B2) == doctest::Approx(1.25 * p.cpu.mem(StepId::B2)).epsilon(1e-9));
  CHECK_THROWS_AS(calibrate_units(p.cpu, StepId::B2, std::vector<std::uint32_t>(8, 1), opt),
                  std::invalid_argument);
}

TEST_CASE("calibration from a relation sample") {
  const auto p = canned_profiles();
  const Relation sample = gen_uniform(2000, KeyRange{}, 5);
  CalibrationOptions opt;
  const DeviceProfile got = calibrate(p.gpu, StepId::P3, sample, opt);
  CHECK(got.mem(StepId::P3) > 0.0);
  opt.mode = Measurement::Host;
  const DeviceProfile host = calibrate(p.cpu, StepId::B3, sample, opt);
  CHECK(host.mem(StepId::B3) >= 0.0);
  CHECK(host.origin.find("host") != std::string::npos);
}
