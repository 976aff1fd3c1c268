// Application shell: tabbed views over one shared store, a revision chip,
// and a stale-state banner when contestations land after page load.

import { ApiClient } from "./api";
import { Store } from "./state";
import { BrowserView } from "./views/browser";
import { EditorView } from "./views/editor";
import { InferenceView } from "./views/inference";

const POLL_INTERVAL_MS = 5000;

export async function bootstrap(root: HTMLElement, api = new ApiClient()): Promise<Store> {
  const store = new Store();

  const header = document.createElement("header");
  header.className = "app-header";
  const title = document.createElement("h1");
  title.textContent = "argrec";
  const revisionChip = document.createElement("span");
  revisionChip.className = "revision-chip";
  const tabs = document.createElement("nav");
  tabs.className = "tabs";
  header.append(title, tabs, revisionChip);

  const bannerHost = document.createElement("div");
  const main = document.createElement("main");
  root.innerHTML = "";
  root.append(header, bannerHost, main);

  async function refreshArtifacts(): Promise<void> {
    const [revision, ontology, qbafs, schema] = await Promise.all([
      api.revision(),
      api.ontology(),
      api.qbafs(),
      api.schema(),
    ]);
    store.update({
      revision: revision.revision,
      stateHash: revision.state_hash,
      ontology,
      qbafs,
      schema,
    });
  }

  await refreshArtifacts();

  const inference = new InferenceView(api, store);
  const editor = new EditorView(api, store, refreshArtifacts);
  const browser = new BrowserView(api, store);
  const views = [
    { name: "Case inference", element: inference.element },
    { name: "Contest", element: editor.element },
    { name: "Artifacts", element: browser.element },
  ];

  function activate(index: number): void {
    main.innerHTML = "";
    const view = views[index];
    if (!view) return;
    main.appendChild(view.element);
    tabs.querySelectorAll("button").forEach((button, i) => {
      button.classList.toggle("active", i === index);
    });
    if (index === 2) browser.render();
  }

  views.forEach((view, index) => {
    const button = document.createElement("button");
    button.textContent = view.name;
    button.addEventListener("click", () => activate(index));
    tabs.appendChild(button);
  });
  activate(0);

  store.subscribe((state) => {
    revisionChip.textContent =
      state.revision === null ? "" : `revision ${state.revision}`;
    bannerHost.innerHTML = "";
    if (state.staleSince !== null) {
      const banner = document.createElement("div");
      banner.className = "banner stale";
      banner.textContent =
        `The shared artifacts changed (revision ${state.staleSince}) after this page ` +
        "loaded. Reload to inspect the latest state.";
      const reload = document.createElement("button");
      reload.textContent = "Reload now";
      reload.addEventListener("click", () => window.location.reload());
      banner.appendChild(reload);
      bannerHost.appendChild(banner);
    }
  });
  store.update({});

  window.setInterval(async () => {
    try {
      const { revision } = await api.revision();
      store.observeRevision(revision);
    } catch {
      // transient poll failures are not worth a banner
    }
  }, POLL_INTERVAL_MS);

  return store;
}

const appRoot = document.getElementById("app");
if (appRoot) {
  void bootstrap(appRoot);
}
