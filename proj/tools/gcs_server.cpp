// gcs-server: runs the chat server until SIGINT/SIGTERM.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "gcs/gateway.hpp"
#include "gcs/server.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Group communication server"};
    gcs::ServerConfig config;
    unsigned interval = 5;
    std::string log_path;
    std::uint16_t gateway_port = 0;
    std::string assets;

    app.add_option("--ip", config.bind_ip, "Address to bind")->envname("GCS_IP")->capture_default_str();
    app.add_option("--port", config.bind_port, "Port to bind")->envname("GCS_PORT")->capture_default_str();
    app.add_option("--heartbeat-interval", interval, "Seconds between liveness pings")->capture_default_str();
    app.add_option("--heartbeat-misses", config.heartbeat_misses, "Unanswered pings tolerated")
        ->capture_default_str();
    app.add_option("--log", log_path, "Append the interaction log here instead of standard output");
    auto* gw = app.add_option("--gateway-port", gateway_port, "Also serve the WebSocket gateway on this port");
    app.add_option("--assets", assets, "Console asset directory for the gateway")->check(CLI::ExistingDirectory);
    CLI11_PARSE(app, argc, argv);

    config.heartbeat_interval = std::chrono::seconds(interval);
    if (!log_path.empty()) config.log_path = log_path;
    if (*gw) config.gateway_port = gateway_port;

    // Signals are collected with sigwait below; block them before any thread starts.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<gcs::Server> server;
    try {
        server = gcs::Server::start(config);
    } catch (const gcs::ConfigError& e) {
        std::cerr << "gcs-server: " << e.what() << '\n';
        return 2;
    } catch (const gcs::BindError& e) {
        std::cerr << "gcs-server: " << e.what() << '\n';
        return 1;
    }

    std::unique_ptr<gcs::Gateway> gateway;
    if (config.gateway_port) {
        gcs::GatewayConfig gc;
        gc.listen_ip = config.bind_ip;
        gc.listen_port = *config.gateway_port;
        gc.server_host = config.bind_ip == "0.0.0.0" ? "127.0.0.1" : config.bind_ip;
        gc.server_port = server->port();
        if (!assets.empty()) gc.assets_dir = assets;
        try {
            gateway = gcs::Gateway::start(gc);
        } catch (const std::exception& e) {
            std::cerr << "gcs-server: gateway on port " << *config.gateway_port << ": " << e.what() << '\n';
            return 1;
        }
        std::cerr << "gateway on http://" << gc.listen_ip << ':' << gateway->port() << "/\n";
    }

    int sig = 0;
    sigwait(&signals, &sig);
    if (gateway) gateway->stop();
    server->stop();
    return 0;
}
