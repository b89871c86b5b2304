import { ChatApi } from "./api";
import { ChatApp } from "./app";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
const app = new ChatApp(root, new ChatApi(""), window.localStorage);
void app.boot();
