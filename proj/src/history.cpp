/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "sketches/history.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sketches {

namespace {

const char* kind_name(event_kind k) {
  return k == event_kind::invoke ? "invoke" : "respond";
}

const char* op_name(op_kind op) {
  switch (op) {
    case op_kind::update: return "update";
    case op_kind::query: return "query";
    case op_kind::flush: return "flush";
  }
  return "?";
}

event_kind parse_kind(const std::string& s) {
  if (s == "invoke") return event_kind::invoke;
  if (s == "respond") return event_kind::respond;
  throw std::runtime_error("history: bad event kind '" + s + "'");
}

op_kind parse_op(const std::string& s) {
  if (s == "update") return op_kind::update;
  if (s == "query") return op_kind::query;
  if (s == "flush") return op_kind::flush;
  throw std::runtime_error("history: bad op kind '" + s + "'");
}

} // namespace

std::string history_log::well_formed() const {
  uint64_t last_ts = 0;
  std::unordered_map<uint32_t, bool> pending; // thread -> invoke outstanding
  for (size_t i = 0; i < events_.size(); ++i) {
    const history_event& e = events_[i];
    if (e.timestamp < last_ts) {
      return "timestamps decrease at event " + std::to_string(i);
    }
    last_ts = e.timestamp;
    bool& open = pending[e.thread];
    if (e.kind == event_kind::invoke) {
      if (open) return "double invoke on thread " + std::to_string(e.thread);
      open = true;
    } else {
      if (!open) return "response without invoke on thread " + std::to_string(e.thread);
      open = false;
    }
  }
  for (const auto& [thread, open] : pending) {
    if (open) return "pending invoke on thread " + std::to_string(thread);
  }
  return {};
}

std::string history_log::to_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : meta_) {
    out << "# " << key << ' ' << value << '\n';
  }
  out << "timestamp,thread,kind,op,payload\n";
  for (const history_event& e : events_) {
    out << e.timestamp << ',' << e.thread << ',' << kind_name(e.kind) << ','
        << op_name(e.op) << ',' << e.payload << '\n';
  }
  return out.str();
}

history_log history_log::from_text(const std::string& text) {
  history_log log;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ml(line.substr(1));
      std::string key;
      ml >> key;
      std::string value;
      std::getline(ml, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      log.meta_[key] = value;
      continue;
    }
    if (!header_seen) {
      if (line != "timestamp,thread,kind,op,payload") {
        throw std::runtime_error("history: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const size_t comma = line.find(',', start);
      if (comma == std::string::npos) throw std::runtime_error("history: short row");
      cols.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    cols.push_back(line.substr(start)); // payload, may be empty
    history_event e;
    e.timestamp = std::stoull(cols[0]);
    e.thread = static_cast<uint32_t>(std::stoul(cols[1]));
    e.kind = parse_kind(cols[2]);
    e.op = parse_op(cols[3]);
    e.payload = cols[4];
    log.events_.push_back(std::move(e));
  }
  if (!header_seen) throw std::runtime_error("history: missing header");
  return log;
}

void history_log::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write history file: " + path);
  out << to_text();
}

history_log history_log::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read history file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

} // namespace sketches
