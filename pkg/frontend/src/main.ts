import { StepClient } from "./protocol.js";
import { StepperApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? "http://127.0.0.1:8787";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

void new StepperApp(new StepClient(server), root).start();
