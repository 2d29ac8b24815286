// Copyright 2026 The xling Authors.
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


#ifndef XLING_SERVICE_H_
#define XLING_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xling/selection.h"
#include "xling/transfer_graph.h"

namespace xling {

// Everything the service exposes. Built once, never mutated afterwards.
struct Workspace {
  TransferGraph graph;
  std::vector<PretrainConfig> configs;
  std::map<std::string, DownstreamResults> downstream;  // by task
  std::vector<HypothesisResult> hypothesis_cache;

  // Every config and result code resolves to a graph node; config ids are
  // unique and every result row names a known config.
  void validate() const;
};

// Layout: graph.json, optional configs/*.json manifests, optional
// results.tsv. Hypotheses are evaluated here when both are present.
Workspace load_workspace(const std::filesystem::path& dir);

struct ServiceConfig {
  std::filesystem::path workspace_dir;
  std::string bind = "127.0.0.1:8080";
  std::string cors_origin;
};

// key=value lines; '#' comments. Relative workspace_dir resolves against
// the config file's directory.
ServiceConfig read_service_config(const std::filesystem::path& path);

struct BindAddress {
  std::string host;
  int port = 0;
};
BindAddress parse_bind(std::string_view bind);

struct Response {
  int status = 200;
  std::string body;
};

using QueryParams = std::map<std::string, std::string>;

// Pure request dispatch; the HTTP server is a thin shell around this.
Response handle_request(const Workspace& workspace, std::string_view method,
                        std::string_view path, const QueryParams& query, std::string_view body);

// Parses the /whatif body. Unknown keys and wrong types are validation
// errors.
struct WhatIfRequest {
  SelectionRequest selection;
  std::string id = "whatif";
  RecipientSplit recipients;
  std::uint64_t budget_chars = PretrainConfig::kDefaultBudget;
};
WhatIfRequest parse_whatif(const nlohmann::json& body);

class Server {
 public:
  Server(const Workspace& workspace, std::string cors_origin);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds without serving. Port 0 picks a free port. Throws IoError.
  int bind(const BindAddress& address);
  // Blocks until stop().
  void listen();
  void stop();
  // Waits until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xling

#endif  // XLING_SERVICE_H_
