master_doc = 'index'
extensions = 'autoapi.extension sphinx.ext.napoleon'.split()

autoapi_type = 'python'
autoapi_dirs = ['dbinfer']
