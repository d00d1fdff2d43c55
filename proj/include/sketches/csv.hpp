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

#ifndef SKETCHES_CSV_HPP_
#define SKETCHES_CSV_HPP_

#include <string>
#include <vector>

namespace sketches {

struct csv_table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal form that round-trips the double exactly (%.17g).
std::string format_double(double v);

/// Writes header + rows, overwriting any existing file. Cells must not
/// contain commas or newlines; rows must match the header width.
void report_emit(const csv_table& table, const std::string& path);

csv_table csv_parse(const std::string& path);

} // namespace sketches

#endif // SKETCHES_CSV_HPP_
