import { HttpApiClient } from "./api.js";
import { mount } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8755";

mount(document.getElementById("app")!, new HttpApiClient(baseUrl));
