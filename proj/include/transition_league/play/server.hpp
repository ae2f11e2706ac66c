#pragma once

// HTTP + JSON routes for play sessions.
//
//   POST /sessions                       create, returns {id, view}
//   GET  /sessions/{id}/view             human view
//   POST /sessions/{id}/stages/{stage}   submit one stage fragment
//   GET  /sessions/{id}/log              finished game log
//   GET  /schema                         payload schemas
//   GET  /action-layout                  action layout descriptor

#include <httplib.h>

#include <string>

#include "session.hpp"

namespace tl {

inline int http_status(Errc code) {
  switch (code) {
    case Errc::SessionNotFound:
    case Errc::UnknownScenario: return 404;
    case Errc::WrongStage: return 409;
    case Errc::InvalidSubmission:
    case Errc::OverProduction:
    case Errc::OverAllocation: return 422;
    case Errc::CheckpointLoadError: return 400;
    default: return 500;
  }
}

/// Machine-readable payload schemas (JSON Schema draft 2020-12 subset).
inline Json play_schema() {
  const Json number = {{"type", "number"}, {"minimum", 0}};
  const Json numbers = [](std::size_t n) {
    return Json{{"type", "array"}, {"items", {{"type", "number"}, {"minimum", 0}}}, {"minItems", n}, {"maxItems", n}};
  }(kNumTracks);
  const Json tiers = {{"type", "array"}, {"items", number}, {"minItems", kNumTiers}, {"maxItems", kNumTiers}};
  const Json order = {{"type", "object"},
                      {"additionalProperties", false},
                      {"properties",
                       {{"sell_volume", number}, {"sell_price", number}, {"buy_volume", number}, {"buy_price", number}}}};
  const Json opponent_public = {
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"seat", {{"type", "integer"}}},
        {"policy", {{"type", "string"}}},
        {"portfolio", {{"type", "string"}}},
        {"equity", {{"type", "number"}}},
        {"cumulative_dividends", {{"type", "number"}}},
        {"last_dividends", {{"type", "number"}}},
        {"last_oil_produced", {{"type", "number"}}},
        {"last_gas_produced", {{"type", "number"}}}}}};
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"version", 1},
      {"requests",
       {{"create_session",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"scenario", "opponents"}},
          {"properties",
           {{"scenario", {{"type", "string"}}},
            {"portfolio", {{"enum", {"Oil-LC", "Gas-LC", "LC", "Oil", "Gas", "Balanced", "Oil-Dominant"}}}},
            {"opponents", {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}}},
            {"seed", {{"type", "integer"}, {"minimum", 0}}},
            {"human_seat", {{"type", "integer"}, {"minimum", 0}, {"maximum", kNumSeats - 1}}}}}}},
        {"production",
         {{"type", "object"}, {"additionalProperties", false}, {"properties", {{"volume", tiers}}}}},
        {"borrowing",
         {{"type", "object"}, {"additionalProperties", false}, {"properties", {{"amount", number}}}}},
        {"trading",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"bid",
             {{"type", "object"},
              {"additionalProperties", false},
              {"properties",
               {{"cash_price", number}, {"cash_volume", number}, {"credit_price", number}, {"credit_volume", number}}}}},
            {"orders", {{"type", "array"}, {"items", order}, {"minItems", kNumTradable}, {"maxItems", kNumTradable}}}}}}},
        {"allocation",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"cash_capex", numbers}, {"credit_capex", numbers}, {"debt_payoff", number}, {"dividends", number}}}}}}},
      {"responses",
       {{"view",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"session", "year", "stage", "terminal", "human_seat", "own", "scenario", "prices", "opponents"}},
          {"properties",
           {{"session", {{"type", "string"}}},
            {"year", {{"type", "integer"}}},
            {"stage", {{"enum", {"production", "borrowing", "trading", "allocation", "finished"}}}},
            {"terminal", {{"type", "boolean"}}},
            {"human_seat", {{"type", "integer"}}},
            {"own", {{"type", "object"}}},
            {"scenario", {{"type", "object"}}},
            {"prices", {{"type", "object"}}},
            {"opponents", {{"type", "array"}, {"items", opponent_public}}},
            {"form", {{"type", "object"}}},
            {"scoreboard", {{"type", "array"}}}}}}},
        {"stage_result",
         {{"type", "object"},
          {"required", {"year", "stage", "cash_delta", "view"}},
          {"properties",
           {{"year", {{"type", "integer"}}},
            {"stage", {{"type", "string"}}},
            {"cash_delta", {{"type", "number"}}},
            {"view", {{"$ref", "#/responses/view"}}}}}}},
        {"error",
         {{"type", "object"},
          {"required", {"error", "message"}},
          {"properties", {{"error", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}}}}}};
}

inline void mount_play_routes(httplib::Server& server, PlayService& service, std::string cors_origin = "*") {
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [reply](auto&& fn) {
    return [fn, reply](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        reply(res, http_status(e.code()), {{"error", errc_name(e.code())}, {"message", e.what()}});
      } catch (const Json::exception& e) {
        reply(res, 400, {{"error", "InvalidSubmission"}, {"message", e.what()}});
      }
    };
  };
  auto body = [](const httplib::Request& req) {
    const auto j = Json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidSubmission, "body: malformed JSON");
    return j;
  };

  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/schema", guarded([reply](const httplib::Request&, httplib::Response& res) { reply(res, 200, play_schema()); }));
  server.Get("/action-layout", guarded([reply](const httplib::Request&, httplib::Response& res) {
               reply(res, 200, action_layout_descriptor());
             }));
  server.Post("/sessions", guarded([&service, reply, body](const httplib::Request& req, httplib::Response& res) {
                const auto session = service.create(parse_session_request(body(req)));
                reply(res, 201, {{"id", session->id()}, {"view", session->view()}});
              }));
  server.Get(R"(/sessions/([^/]+)/view)", guarded([&service, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, 200, service.get(req.matches[1])->view());
             }));
  server.Post(R"(/sessions/([^/]+)/stages/([^/]+))",
              guarded([&service, reply, body](const httplib::Request& req, httplib::Response& res) {
                const auto session = service.get(req.matches[1]);
                const std::string name = req.matches[2];
                const auto stage = parse_stage(name);
                if (!stage) throw Error(Errc::WrongStage, fmt::format("unknown stage '{}'", name));
                reply(res, 200, session->submit(*stage, body(req)));
              }));
  server.Get(R"(/sessions/([^/]+)/log)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               res.set_content(dump(service.get(req.matches[1])->log()), "application/json");
             }));
}

}  // namespace tl
