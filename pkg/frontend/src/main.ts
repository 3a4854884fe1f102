import { Api } from "./api.js";
import { SessionController } from "./controller.js";
import { bindKeys, render, showError } from "./ui.js";

function sessionIdFromLocation(): string | null {
  return new URLSearchParams(window.location.search).get("session");
}

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const sessionId = sessionIdFromLocation();
  if (!sessionId) {
    showError(root, "No session id. Open /ui/?session=<id>.", () => start());
    return;
  }
  const controller = new SessionController(new Api(""), sessionId);

  const choose = async (cls: number) => {
    try {
      await controller.submit(cls);
      render(root, controller, choose);
    } catch (err) {
      showError(root, String(err), () => start());
    }
  };

  try {
    await controller.refresh();
  } catch (err) {
    showError(root, `Cannot reach session: ${String(err)}`, () => start());
    return;
  }
  bindKeys(window, controller, choose);
  render(root, controller, choose);
}

start();
