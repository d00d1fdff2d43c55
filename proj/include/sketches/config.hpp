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

#ifndef SKETCHES_CONFIG_HPP_
#define SKETCHES_CONFIG_HPP_

#include <map>
#include <string>

namespace sketches {

/// Key-value run configuration: one `key = value` per line, `#` comments and
/// blank lines ignored, keys and values trimmed. Later keys win.
std::map<std::string, std::string> load_key_value_config(const std::string& path);

std::map<std::string, std::string> parse_key_value_config(const std::string& text);

} // namespace sketches

#endif // SKETCHES_CONFIG_HPP_
