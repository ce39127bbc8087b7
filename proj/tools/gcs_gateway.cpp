// gcs-gateway: WebSocket bridge and console host in front of a running server.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "gcs/gateway.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"WebSocket gateway for the group communication server"};
    gcs::GatewayConfig config;
    std::string assets;
    app.add_option("--listen", config.listen_port, "Port for HTTP and WebSocket clients")->required();
    app.add_option("--listen-ip", config.listen_ip, "Address for HTTP and WebSocket clients")->capture_default_str();
    app.add_option("--server-host", config.server_host, "Chat server address")->capture_default_str();
    app.add_option("--server-port", config.server_port, "Chat server port")->capture_default_str();
    app.add_option("--assets", assets, "Console asset directory")->check(CLI::ExistingDirectory);
    CLI11_PARSE(app, argc, argv);
    if (!assets.empty()) config.assets_dir = assets;

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<gcs::Gateway> gateway;
    try {
        gateway = gcs::Gateway::start(config);
    } catch (const std::exception& e) {
        std::cerr << "gcs-gateway: cannot listen on " << config.listen_ip << ':' << config.listen_port << ": "
                  << e.what() << '\n';
        return 1;
    }
    std::cerr << "gateway on http://" << config.listen_ip << ':' << gateway->port() << "/ -> "
              << config.server_host << ':' << config.server_port << '\n';

    int sig = 0;
    sigwait(&signals, &sig);
    gateway->stop();
    return 0;
}
