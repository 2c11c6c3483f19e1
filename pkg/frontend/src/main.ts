import { TriageClient } from "./api.js";
import { App } from "./app.js";

const meta = document.querySelector<HTMLMetaElement>('meta[name="triage-service"]');
const baseUrl = meta?.content ?? "http://127.0.0.1:8080";
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

void new App(root, new TriageClient(baseUrl)).boot();
